//! Small dense linear-algebra helpers shared by the low-rank integrators.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Thin Householder QR of `block`, returning `(Q, R)` with `Q` having
/// `min(rows, cols)` orthonormal columns and `block = Q R`.
///
/// Householder reflections keep `Q` orthonormal even when `block` is rank
/// deficient: a numerically null column simply receives a completion vector
/// orthogonal to the preceding ones, with a vanishing diagonal entry in `R`.
pub fn qr(block: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let (rows, cols) = block.shape();
    if rows == 0 || cols == 0 {
        let k = rows.min(cols);
        return (DMatrix::zeros(rows, k), DMatrix::zeros(k, cols));
    }
    let qr = block.clone().qr();
    let (mut q, mut r) = (qr.q(), qr.r());
    // Fix the sign convention so that diag(R) >= 0; makes the factorization unique
    // for full-rank blocks and the output reproducible.
    for k in 0..q.ncols() {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
            r.row_mut(k).neg_mut();
        }
    }
    (q, r)
}

/// Orthonormal basis whose range contains the range of `block`.
pub fn orthonormal_basis(block: &DMatrix<f64>) -> DMatrix<f64> {
    qr(block).0
}

/// Number of numerically null columns encountered by QR of `block`
/// (diagonal of `R` below `1e-12 * ||block||_F`).
pub fn null_column_count(block: &DMatrix<f64>) -> usize {
    let (_, r) = qr(block);
    let tol = 1e-12 * block.norm();
    (0..r.nrows().min(r.ncols()))
        .filter(|&k| r[(k, k)].abs() <= tol)
        .count()
}

/// `[base, Q]`, where `base` has orthonormal columns and `Q` is an orthonormal
/// basis for the part of `new` orthogonal to `base`. `new` is negligible
/// (and nothing is added) when `‖(I − base baseᵀ) new‖_F ≤ rel_tol · ‖new‖_F`.
/// `Q` may contain completion directions when `new` is rank deficient, and
/// never has more than `base.nrows() − base.ncols()` columns.
pub fn extend_orthonormal(base: &DMatrix<f64>, new: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (rows, k) = base.shape();
    assert_eq!(rows, new.nrows(), "extend_orthonormal: row mismatch");
    let scale = new.norm();
    let room = rows - k;
    if new.ncols() == 0 || room == 0 || !(scale > 0.0) {
        return base.clone();
    }
    let base_t = base.transpose();
    let project = |m: &mut DMatrix<f64>| {
        if k > 0 {
            let c = &base_t * &*m;
            m.gemm(-1.0, base, &c, 1.0);
        }
    };
    let mut w = new.clone();
    project(&mut w);
    project(&mut w);
    if w.norm() <= rel_tol * scale {
        return base.clone();
    }
    let mut q = qr(&w).0;
    project(&mut q);
    // Directions of the range of W have unit norm after projection; Householder
    // completions for rank-deficient W may lie partly in the range of `base`
    // and are filtered by the spectrum of the Gram matrix.
    let eig = (q.transpose() * &q).symmetric_eigen();
    let kept: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > 0.25)
        .take(room)
        .collect();
    if kept.is_empty() {
        return base.clone();
    }
    let mut mix = DMatrix::zeros(q.ncols(), kept.len());
    for (c, &i) in kept.iter().enumerate() {
        mix.column_mut(c)
            .copy_from(&(eig.eigenvectors.column(i) / eig.eigenvalues[i].sqrt()));
    }
    let q = q * mix;
    // The Gram matrix is now within rounding of the identity; one Cholesky
    // pass Q L⁻ᵀ restores orthonormality.
    let q = match (q.transpose() * &q).cholesky() {
        Some(ch) => match ch.l().try_inverse() {
            Some(l_inv) => q * l_inv.transpose(),
            None => qr(&q).0,
        },
        None => qr(&q).0,
    };
    hstack(base, &q)
}

/// Horizontal concatenation `[a, b]`.
pub fn hstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows(), "hstack: row mismatch");
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// `[v, m]` for a column vector `v`.
pub fn prepend_column(v: &DVector<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(v.len(), m.nrows(), "prepend_column: row mismatch");
    let mut out = DMatrix::zeros(m.nrows(), m.ncols() + 1);
    out.column_mut(0).copy_from(v);
    out.columns_mut(1, m.ncols()).copy_from(m);
    out
}

/// Largest absolute entry of `QᵀQ − I`.
pub fn orthonormality_defect(q: &DMatrix<f64>) -> f64 {
    let gram = q.transpose() * q;
    let n = gram.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

pub fn all_finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// Singular value decomposition with singular values in non-increasing order.
pub struct SortedSvd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v: DMatrix<f64>,
}

pub fn svd(m: &DMatrix<f64>) -> Result<SortedSvd> {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Ok(SortedSvd {
            u: DMatrix::zeros(rows, 0),
            singular_values: Vec::new(),
            v: DMatrix::zeros(cols, 0),
        });
    }
    if !all_finite(m) {
        return Err(Error::Numerical("SVD input contains non-finite entries".into()));
    }
    let f = faer::Mat::<f64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let dec = f
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("SVD of a {rows}x{cols} matrix did not converge: {e:?}")))?;
    let (u, s, v) = (dec.U(), dec.S().column_vector(), dec.V());
    Ok(SortedSvd {
        u: DMatrix::from_fn(rows, k, |i, j| u[(i, j)]),
        singular_values: (0..k).map(|i| s[i]).collect(),
        v: DMatrix::from_fn(cols, k, |i, j| v[(i, j)]),
    })
}

/// Pads an orthonormal `rows x k` matrix to `rows x target` orthonormal columns,
/// keeping the existing columns unchanged.
pub fn complete_orthonormal(basis: &DMatrix<f64>, target: usize) -> DMatrix<f64> {
    let (rows, k) = basis.shape();
    assert!(target <= rows, "cannot complete to more columns than rows");
    if target <= k {
        return basis.columns(0, target).into_owned();
    }
    // Deterministic, generically non-degenerate filler; QR picks up whatever the
    // existing columns do not span.
    let filler = DMatrix::from_fn(rows, target - k, |i, j| {
        let x = (i as f64 + 1.0) * (j as f64 + 1.6180339887);
        (x * 12.9898).sin() * 0.5 + ((i * 7 + j * 13) % 11) as f64 / 11.0 - 0.5
    });
    let q = orthonormal_basis(&hstack(basis, &filler));
    let mut out = DMatrix::zeros(rows, target);
    out.columns_mut(0, k).copy_from(basis);
    out.columns_mut(k, target - k)
        .copy_from(&q.columns(k, target - k));
    out
}
