//! Angular moment bases and their streaming matrices.
//!
//! Slab geometry uses the orthonormal Legendre polynomials `P_0 .. P_{N-1}` on
//! `[-1, 1]`. Two-dimensional problems use real spherical harmonics that are
//! orthonormal on the unit sphere, ordered `(ℓ, m)` lexicographically with
//! `ℓ = 0..=n_pn` and `m = -ℓ..=ℓ`, i.e. index `ℓ² + ℓ + m`.

mod legendre;
pub mod quadrature;
mod spherical;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use legendre::{build_flux_matrix, legendre_eval, streaming_coupling};
pub use spherical::{
    build_pn_flux_matrices_2d, project_on_harmonics, real_spherical_harmonic, sh_index,
    sh_moment_count,
};

/// Streaming matrix `A` of one direction cosine together with `|A|` and `|A|^{1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxMatrices {
    pub n_moments: usize,
    pub a: DMatrix<f64>,
    pub a_abs: DMatrix<f64>,
    pub a_abs_sqrt: DMatrix<f64>,
}

impl FluxMatrices {
    /// Builds the stabilization matrices from a symmetric streaming matrix.
    pub fn from_streaming(a: DMatrix<f64>) -> Result<Self> {
        let (a_abs, a_abs_sqrt) = abs_flux_matrix(&a)?;
        Ok(FluxMatrices {
            n_moments: a.nrows(),
            a,
            a_abs,
            a_abs_sqrt,
        })
    }

    /// Largest eigenvalue magnitude of `A`.
    pub fn spectral_radius(&self) -> f64 {
        nalgebra::SymmetricEigen::new(self.a.clone())
            .eigenvalues
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Returns `(Q|M|Qᵀ, Q|M|^{1/2}Qᵀ)` for the eigendecomposition `A = Q M Qᵀ`.
pub fn abs_flux_matrix(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidArgument(format!(
            "streaming matrix must be square, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let asym = (a - a.transpose()).amax();
    if asym > 1e-12 * a.amax().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "streaming matrix is not symmetric (max asymmetry {asym:e})"
        )));
    }
    if !crate::linalg::all_finite(a) {
        return Err(Error::Numerical("streaming matrix has non-finite entries".into()));
    }
    let eig = nalgebra::SymmetricEigen::try_new(a.clone(), f64::EPSILON, 0).ok_or_else(|| {
        Error::Numerical(format!(
            "symmetric eigendecomposition of {n}x{n} streaming matrix did not converge"
        ))
    })?;
    let q = &eig.eigenvectors;
    let abs = eig.eigenvalues.map(f64::abs);
    let sqrt = abs.map(f64::sqrt);
    let a_abs = q * DMatrix::from_diagonal(&abs) * q.transpose();
    let a_abs_sqrt = q * DMatrix::from_diagonal(&sqrt) * q.transpose();
    // Symmetrize away rounding so that downstream Galerkin products stay symmetric.
    Ok((
        (&a_abs + a_abs.transpose()) * 0.5,
        (&a_abs_sqrt + a_abs_sqrt.transpose()) * 0.5,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_of_two_by_two() {
        let c = 1.0 / 3.0_f64.sqrt();
        let a = DMatrix::from_row_slice(2, 2, &[0.0, c, c, 0.0]);
        let (abs, _) = abs_flux_matrix(&a).unwrap();
        let expected = DMatrix::identity(2, 2) * c;
        assert!((abs - expected).amax() < 1e-15);
    }

    #[test]
    fn abs_of_zero() {
        let (abs, sqrt) = abs_flux_matrix(&DMatrix::zeros(1, 1)).unwrap();
        assert_eq!(abs[(0, 0)], 0.0);
        assert_eq!(sqrt[(0, 0)], 0.0);
    }

    #[test]
    fn rejects_nonsymmetric() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(abs_flux_matrix(&a), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn legendre_flux_invariants() {
        let f = build_flux_matrix(50).unwrap();
        assert!(f.spectral_radius() <= 1.0);
        for i in 0..50 {
            assert_eq!(f.a[(i, i)], 0.0);
        }
        let sq = &f.a_abs_sqrt * &f.a_abs_sqrt;
        assert!((sq - &f.a_abs).amax() <= 1e-12 * f.a_abs.amax());
        let comm = &f.a_abs * &f.a - &f.a * &f.a_abs;
        assert!(comm.norm() <= 1e-12 * f.a.norm().powi(2));
        let min_eig = nalgebra::SymmetricEigen::new(f.a_abs.clone())
            .eigenvalues
            .min();
        assert!(min_eig > -1e-12);
    }
}
