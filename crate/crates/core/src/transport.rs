//! Semi-discrete streaming operator `F(u) = Σ_d (−D^x_d u A_d + D^xx_d u |A_d|)`
//! and its projections onto low-rank factors.
//!
//! Every streaming matrix is symmetric, so `u A_dᵀ = u A_d` throughout.

use nalgebra::{DMatrix, DVector};

use crate::angular::FluxMatrices;
use crate::error::{Error, Result};
use crate::spatial::{Axis, Mesh, StencilKind};

#[derive(Debug, Clone)]
pub struct Transport {
    mesh: Mesh,
    axes: Vec<Axis>,
    flux: Vec<FluxMatrices>,
    n_moments: usize,
}

impl Transport {
    /// `flux[d]` streams along spatial axis `d` of `mesh`.
    pub fn new(mesh: Mesh, flux: Vec<FluxMatrices>) -> Result<Self> {
        if flux.len() != mesh.dimension() {
            return Err(Error::InvalidArgument(format!(
                "{}-dimensional mesh needs {} streaming matrices, got {}",
                mesh.dimension(),
                mesh.dimension(),
                flux.len()
            )));
        }
        let n_moments = flux[0].n_moments;
        if flux.iter().any(|f| f.n_moments != n_moments) {
            return Err(Error::InvalidArgument(
                "streaming matrices disagree on the moment count".into(),
            ));
        }
        let axes = mesh.axes()?;
        Ok(Transport {
            mesh,
            axes,
            flux,
            n_moments,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn flux(&self) -> &[FluxMatrices] {
        &self.flux
    }

    pub fn n_cells(&self) -> usize {
        self.mesh.n_cells()
    }

    pub fn n_moments(&self) -> usize {
        self.n_moments
    }

    fn pairs(&self) -> impl Iterator<Item = (&Axis, &FluxMatrices)> {
        self.axes.iter().zip(&self.flux)
    }

    /// Full-rank right-hand side `F(u)` for `u ∈ ℝ^{n_cells × n_moments}`.
    pub fn rhs(&self, u: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(u.nrows(), u.ncols());
        for (axis, f) in self.pairs() {
            let ua = u * &f.a;
            let uabs = u * &f.a_abs;
            out -= axis.apply(StencilKind::Central, &ua);
            out += axis.apply(StencilKind::Stabilization, &uabs);
        }
        out
    }

    /// Zeroth-moment column of `F(K Vᵀ)` without forming `K Vᵀ`.
    pub fn rhs_zeroth(&self, k: &DMatrix<f64>, v: &DMatrix<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(k.nrows());
        for (axis, f) in self.pairs() {
            // (K Vᵀ A)_{·0} = K (Vᵀ A e₀)
            let wa = v.transpose() * f.a.column(0);
            let wabs = v.transpose() * f.a_abs.column(0);
            out -= axis.apply_vec(StencilKind::Central, &(k * wa));
            out += axis.apply_vec(StencilKind::Stabilization, &(k * wabs));
        }
        out
    }

    /// K-step right-hand side `Σ −D^x K (VᵀAV) + D^xx K (Vᵀ|A|V)`.
    pub fn k_rhs(&self, k: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(k.nrows(), k.ncols());
        for (axis, f) in self.pairs() {
            let pa = v.transpose() * &f.a * v;
            let pabs = v.transpose() * &f.a_abs * v;
            out -= axis.apply(StencilKind::Central, &(k * pa.transpose()));
            out += axis.apply(StencilKind::Stabilization, &(k * pabs.transpose()));
        }
        out
    }

    /// Galerkin stencil `Xᵀ D X` along each axis, as `(central, stabilization)`.
    pub fn projected_stencils(&self, x: &DMatrix<f64>) -> Vec<(DMatrix<f64>, DMatrix<f64>)> {
        let xt = x.transpose();
        self.axes
            .iter()
            .map(|axis| {
                (
                    &xt * axis.apply(StencilKind::Central, x),
                    &xt * axis.apply(StencilKind::Stabilization, x),
                )
            })
            .collect()
    }

    /// Extends the Galerkin stencils of `X⁰` (from [`Self::projected_stencils`])
    /// to `X⋆ = [X⁰, Q]`, computing only `X⋆ᵀ D Q` and filling the remaining
    /// block from the antisymmetry of `D^x` and the symmetry of `D^xx`.
    pub fn extend_projected_stencils(
        &self,
        old: &[(DMatrix<f64>, DMatrix<f64>)],
        x_star: &DMatrix<f64>,
    ) -> Vec<(DMatrix<f64>, DMatrix<f64>)> {
        let m = x_star.ncols();
        let r = old.first().map_or(0, |(c, _)| c.nrows());
        assert!(r <= m, "extended basis is smaller than the old one");
        let q = x_star.columns(r, m - r).into_owned();
        let xt = x_star.transpose();
        let fill = |old_block: &DMatrix<f64>, dq: DMatrix<f64>, sign: f64| {
            let p = &xt * dq;
            let mut out = DMatrix::zeros(m, m);
            out.view_mut((0, 0), (r, r)).copy_from(old_block);
            out.view_mut((0, r), (m, m - r)).copy_from(&p);
            out.view_mut((r, 0), (m - r, r))
                .copy_from(&(p.rows(0, r).transpose() * sign));
            out
        };
        self.axes
            .iter()
            .zip(old)
            .map(|(axis, (c, s))| {
                (
                    fill(c, axis.apply(StencilKind::Central, &q), -1.0),
                    fill(s, axis.apply(StencilKind::Stabilization, &q), 1.0),
                )
            })
            .collect()
    }

    /// L-step right-hand side `Σ −A L (XᵀD^xX)ᵀ + |A| L (XᵀD^xxX)ᵀ`.
    pub fn l_rhs(&self, l: &DMatrix<f64>, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.l_rhs_with(l, &self.projected_stencils(x))
    }

    /// [`Self::l_rhs`] with precomputed Galerkin stencils.
    pub fn l_rhs_with(&self, l: &DMatrix<f64>, stencils: &[(DMatrix<f64>, DMatrix<f64>)]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(l.nrows(), l.ncols());
        for (f, (dx, dxx)) in self.flux.iter().zip(stencils) {
            out -= &f.a * l * dx.transpose();
            out += &f.a_abs * l * dxx.transpose();
        }
        out
    }

    /// S-step right-hand side `Σ −(XᵀD^xX) S (VᵀAV)ᵀ + (XᵀD^xxX) S (Vᵀ|A|V)ᵀ`.
    pub fn s_rhs(&self, x: &DMatrix<f64>, s: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
        self.s_rhs_with(&self.projected_stencils(x), s, v)
    }

    /// [`Self::s_rhs`] with precomputed Galerkin stencils.
    pub fn s_rhs_with(
        &self,
        stencils: &[(DMatrix<f64>, DMatrix<f64>)],
        s: &DMatrix<f64>,
        v: &DMatrix<f64>,
    ) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(s.nrows(), s.ncols());
        for (f, (dx, dxx)) in self.flux.iter().zip(stencils) {
            let pa = v.transpose() * &f.a * v;
            let pabs = v.transpose() * &f.a_abs * v;
            out -= dx * s * pa.transpose();
            out += dxx * s * pabs.transpose();
        }
        out
    }
}

/// Closed-form solution of the per-cell implicit absorption/emission system
///
/// ```text
/// (1+σΔt)·u − σΔt·B = c
/// −σΔt·u + (1+σΔt)·B = b0
/// ```
///
/// The two returned values always sum to `c + b0` up to rounding.
#[inline]
pub fn absorption_emission_solve(c: f64, b0: f64, sigma: f64, dt: f64) -> (f64, f64) {
    let k = sigma * dt;
    let det = 1.0 + 2.0 * k;
    (((1.0 + k) * c + k * b0) / det, ((1.0 + k) * b0 + k * c) / det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::build_flux_matrix;
    use crate::spatial::Grid1D;

    fn line(n_x: usize, n_mom: usize) -> Transport {
        let mesh = Mesh::Line(Grid1D::new(n_x, -1.0, 1.0).unwrap());
        Transport::new(mesh, vec![build_flux_matrix(n_mom).unwrap()]).unwrap()
    }

    fn test_matrix(r: usize, c: usize, seed: f64) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |i, j| ((i * 31 + j * 17) as f64 * seed).sin())
    }

    #[test]
    fn extended_stencils_match_direct_projection() {
        let t = line(24, 5);
        let (x0, _) = crate::linalg::qr(&test_matrix(24, 3, 0.37));
        let x_star = crate::linalg::extend_orthonormal(&x0, &test_matrix(24, 4, 0.91), 1e-14);
        let old = t.projected_stencils(&x0);
        let ext = t.extend_projected_stencils(&old, &x_star);
        for ((c, s), (c2, s2)) in ext.iter().zip(t.projected_stencils(&x_star)) {
            assert!((c - c2).amax() < 1e-12);
            assert!((s - s2).amax() < 1e-12);
        }
    }

    #[test]
    fn coupled_solve_by_hand() {
        let (u, b) = absorption_emission_solve(2.0, 1.0, 1.0, 0.5);
        assert!((u - 1.75).abs() < 1e-15);
        assert!((b - 1.25).abs() < 1e-15);
        assert!((u - (2.0 + 0.5 * (b - u))).abs() < 1e-15);
        assert_eq!(absorption_emission_solve(3.0, 7.0, 0.0, 0.1), (3.0, 7.0));
    }

    #[test]
    fn projected_rhs_agree_with_dense() {
        let t = line(12, 6);
        let x = crate::linalg::orthonormal_basis(&test_matrix(12, 3, 0.37));
        let v = crate::linalg::orthonormal_basis(&test_matrix(6, 3, 0.91));
        let s = test_matrix(3, 3, 1.3);
        let u = &x * &s * v.transpose();
        let full = t.rhs(&u);
        let k = &x * &s;
        assert!((t.k_rhs(&k, &v) - &full * &v).amax() < 1e-12);
        let l = &v * s.transpose();
        assert!((t.l_rhs(&l, &x) - full.transpose() * &x).amax() < 1e-12);
        assert!((t.s_rhs(&x, &s, &v) - x.transpose() * &full * &v).amax() < 1e-12);
        let z = t.rhs_zeroth(&k, &v);
        assert!((z - full.column(0)).amax() < 1e-12);
    }

    #[test]
    fn rejects_mismatched_dimensions() {
        let mesh = Mesh::Line(Grid1D::new(8, 0.0, 1.0).unwrap());
        let f = build_flux_matrix(4).unwrap();
        assert!(Transport::new(mesh, vec![f.clone(), f]).is_err());
    }
}
