//! Rank truncation of augmented low-rank factors.
//!
//! The standard strategy truncates the singular values of the coefficient
//! matrix by a tail criterion. The conservative strategy first splits off the
//! zeroth-moment column of the solution, keeps it exactly, and truncates only
//! the remainder, so that the scalar flux `Φ_j = u_{j0}` is left untouched.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{qr, svd};

/// How the truncation tolerance `ϑ` is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// `ϑ = factor · ‖Σ‖₂`, with `Σ` the singular values being truncated.
    Relative(f64),
    Absolute(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationConfig {
    pub tolerance: Tolerance,
    pub r_min: usize,
    pub r_max: usize,
}

impl TruncationConfig {
    pub fn relative(theta_rel: f64, r_min: usize, r_max: usize) -> Self {
        TruncationConfig {
            tolerance: Tolerance::Relative(theta_rel),
            r_min,
            r_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let theta = match self.tolerance {
            Tolerance::Relative(t) | Tolerance::Absolute(t) => t,
        };
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "truncation tolerance must be finite and non-negative, got {theta}"
            )));
        }
        if self.r_min < 1 || self.r_min > self.r_max {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= r_min <= r_max, got r_min = {}, r_max = {}",
                self.r_min, self.r_max
            )));
        }
        Ok(())
    }

    /// The absolute threshold `ϑ` for singular values sorted in decreasing order.
    pub fn threshold(&self, singular_values: &[f64]) -> f64 {
        match self.tolerance {
            Tolerance::Relative(t) => t * singular_values.first().copied().unwrap_or(0.0),
            Tolerance::Absolute(t) => t,
        }
    }
}

/// Low-rank factors `X S Vᵀ` with orthonormal `X` and `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct Factors {
    pub x: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub v: DMatrix<f64>,
}

impl Factors {
    pub fn rank(&self) -> usize {
        self.s.nrows()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        &self.x * &self.s * self.v.transpose()
    }
}

/// Smallest `r` with `(Σ_{j ≥ r} σ_j²)^{1/2} ≤ ϑ`, for decreasing `σ`.
pub fn tail_rank(singular_values: &[f64], theta: f64) -> usize {
    let mut tail = 0.0;
    let mut r = singular_values.len();
    while r > 0 {
        let next = tail + singular_values[r - 1] * singular_values[r - 1];
        if next.sqrt() > theta {
            break;
        }
        tail = next;
        r -= 1;
    }
    r
}

/// Applies `[r_min, r_max]` bounds. Falling below `r_min` is padded silently;
/// exceeding `r_max` is an error.
fn bounded_rank(required: usize, available: usize, cfg: &TruncationConfig, offset: usize) -> Result<usize> {
    if required + offset > cfg.r_max {
        return Err(Error::RankOverflow {
            required: required + offset,
            r_max: cfg.r_max,
        });
    }
    Ok(required.max(cfg.r_min.saturating_sub(offset)).min(available))
}

/// Standard rank-adaptive truncation of `X̂ Ŝ V̂ᵀ`.
pub fn truncate_standard(
    x_hat: &DMatrix<f64>,
    s_hat: &DMatrix<f64>,
    v_hat: &DMatrix<f64>,
    cfg: &TruncationConfig,
) -> Result<Factors> {
    cfg.validate()?;
    let dec = svd(s_hat)?;
    let theta = cfg.threshold(&dec.singular_values);
    let required = tail_rank(&dec.singular_values, theta);
    let r = bounded_rank(required, dec.singular_values.len(), cfg, 0)?;
    let sigma = DVector::from_iterator(r, dec.singular_values.iter().copied().take(r));
    Ok(Factors {
        x: x_hat * dec.u.columns(0, r),
        s: DMatrix::from_diagonal(&sigma),
        v: v_hat * dec.v.columns(0, r),
    })
}

/// Locally mass-conservative truncation. Requires `X̂` to have orthonormal
/// columns, the first column of `V̂` to be `e₁` (the zeroth moment) and the
/// remaining columns of `V̂` to be orthogonal to it.
pub fn truncate_conservative(
    x_hat: &DMatrix<f64>,
    s_hat: &DMatrix<f64>,
    v_hat: &DMatrix<f64>,
    cfg: &TruncationConfig,
) -> Result<Factors> {
    cfg.validate()?;
    let n_cells = x_hat.nrows();
    let n_moments = v_hat.nrows();
    if v_hat.ncols() == 0 || s_hat.ncols() != v_hat.ncols() || x_hat.ncols() != s_hat.nrows() {
        return Err(Error::InvalidArgument("inconsistent factor shapes".into()));
    }
    let lead = v_hat.column(0);
    let e1_defect = (lead[0] - 1.0)
        .abs()
        .max(lead.rows(1, n_moments - 1).amax())
        .max(v_hat.row(0).columns(1, v_hat.ncols() - 1).amax());
    if e1_defect > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "conservative truncation needs V̂ = [e₁, V_rem] with V_rem ⟂ e₁ (defect {e1_defect:e})"
        )));
    }

    // Step 1: split K = X̂ Ŝ into the conserved first column and the remainder.
    // With X̂ orthonormal both parts are handled through their coefficients
    // in X̂, so every factorization below acts on small matrices.
    let a_cons = s_hat.column(0).into_owned();
    let s_rem_hat = s_hat.columns(1, s_hat.ncols() - 1).into_owned();
    let v_rem_hat = v_hat.columns(1, v_hat.ncols() - 1).into_owned();

    // Step 2: normalize the conserved column.
    let s_cons = a_cons.norm();

    // Steps 3-4: QR and SVD-truncate the remainder.
    let max_rem = (n_cells - 1).min(n_moments - 1);
    let (c_rem, s_rem, v_rem) = if s_rem_hat.ncols() == 0 || max_rem == 0 {
        bounded_rank(0, 0, cfg, 1)?;
        (
            DMatrix::zeros(x_hat.ncols(), 0),
            DVector::zeros(0),
            DMatrix::zeros(n_moments, 0),
        )
    } else {
        let (q_rem, r_rem) = qr(&s_rem_hat);
        let dec = svd(&r_rem)?;
        let theta = cfg.threshold(&dec.singular_values);
        let required = tail_rank(&dec.singular_values, theta);
        let r = bounded_rank(required, dec.singular_values.len().min(max_rem), cfg, 1)?;
        (
            &q_rem * dec.u.columns(0, r),
            DVector::from_iterator(r, dec.singular_values.iter().copied().take(r)),
            &v_rem_hat * dec.v.columns(0, r),
        )
    };
    let r_rem = s_rem.len();

    // Step 5: reassemble [x_cons, X_rem] = X̂ C and re-orthonormalize.
    let mut c_block = DMatrix::zeros(x_hat.ncols(), r_rem + 1);
    if s_cons > 0.0 {
        c_block.column_mut(0).copy_from(&(a_cons / s_cons));
    }
    c_block.columns_mut(1, r_rem).copy_from(&c_rem);
    let (x1, r1) = if s_cons > 0.0 && c_block.nrows() >= c_block.ncols() {
        let (q, r) = qr(&c_block);
        (x_hat * q, r)
    } else {
        // Zero flux column: any unit vector represents it with S_cons = 0.
        let mut x_block = x_hat * &c_block;
        if s_cons == 0.0 {
            x_block.column_mut(0).fill(0.0);
            x_block[(0, 0)] = 1.0;
        }
        qr(&x_block)
    };
    let mut v_block = DMatrix::zeros(n_moments, r_rem + 1);
    v_block[(0, 0)] = 1.0;
    v_block.columns_mut(1, r_rem).copy_from(&v_rem);
    let (v1, r2) = qr(&v_block);

    // Step 6: S¹ = R¹ diag(S_cons, S_rem) R²ᵀ.
    let mut core = DMatrix::zeros(r_rem + 1, r_rem + 1);
    core[(0, 0)] = s_cons;
    for i in 0..r_rem {
        core[(i + 1, i + 1)] = s_rem[i];
    }
    let s1 = r1 * core * r2.transpose();
    Ok(Factors { x: x1, s: s1, v: v1 })
}
