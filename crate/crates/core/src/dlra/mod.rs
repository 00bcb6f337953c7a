//! Dynamical low-rank integrators built on the rank-adaptive BUG scheme.

mod stable;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, complete_orthonormal, orthonormality_defect, svd};
use crate::transport::Transport;
use crate::truncation::{Factors, TruncationConfig};

pub use stable::{
    absorption_update, augment_and_project, coupled_zeroth_update, dlra_step,
    flux_augment_and_correct, k_step, l_step, s_step, AugmentedBases,
};

/// Low-rank moments `u ≈ X S Vᵀ` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankState {
    /// `n_cells × r`, orthonormal columns.
    pub x: DMatrix<f64>,
    /// `r × r`.
    pub s: DMatrix<f64>,
    /// `n_moments × r`, orthonormal columns.
    pub v: DMatrix<f64>,
    pub t: f64,
    pub step: usize,
}

impl LowRankState {
    pub fn from_factors(f: Factors, t: f64, step: usize) -> Self {
        LowRankState {
            x: f.x,
            s: f.s,
            v: f.v,
            t,
            step,
        }
    }

    /// Factorizes a dense moment matrix by SVD and pads it to `rank` with
    /// orthonormal completion columns carrying zero singular values.
    pub fn from_dense(u: &DMatrix<f64>, rank: usize) -> Result<Self> {
        let (n, m) = u.shape();
        let max_rank = n.min(m);
        if rank < 1 || rank > max_rank {
            return Err(Error::InvalidArgument(format!(
                "initial rank {rank} outside [1, {max_rank}]"
            )));
        }
        let dec = svd(u)?;
        let scale = dec.singular_values.first().copied().unwrap_or(0.0);
        let numerical = dec
            .singular_values
            .iter()
            .take_while(|&&s| s > 1e-14 * scale && s > 0.0)
            .count()
            .min(rank);
        let keep = numerical.max(1);
        let x = complete_orthonormal(&dec.u.columns(0, keep).into_owned(), rank);
        let v = complete_orthonormal(&dec.v.columns(0, keep).into_owned(), rank);
        let mut s = DMatrix::zeros(rank, rank);
        for i in 0..numerical {
            s[(i, i)] = dec.singular_values[i];
        }
        Ok(LowRankState { x, s, v, t: 0.0, step: 0 })
    }

    pub fn rank(&self) -> usize {
        self.s.nrows()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        &self.x * &self.s * self.v.transpose()
    }

    /// Zeroth-moment column `X S Vᵀ e₁` (the scalar flux).
    pub fn zeroth_moment(&self) -> DVector<f64> {
        &self.x * (&self.s * self.v.row(0).transpose())
    }

    pub fn factors(&self) -> Factors {
        Factors {
            x: self.x.clone(),
            s: self.s.clone(),
            v: self.v.clone(),
        }
    }

    /// Largest orthonormality defect of the two bases.
    pub fn basis_defect(&self) -> f64 {
        orthonormality_defect(&self.x).max(orthonormality_defect(&self.v))
    }

    pub fn validate(&self, transport: &Transport) -> Result<()> {
        let r = self.rank();
        if self.s.ncols() != r || self.x.ncols() != r || self.v.ncols() != r {
            return Err(Error::InvalidArgument(format!(
                "factor shapes X {:?}, S {:?}, V {:?} are inconsistent",
                self.x.shape(),
                self.s.shape(),
                self.v.shape()
            )));
        }
        if self.x.nrows() != transport.n_cells() || self.v.nrows() != transport.n_moments() {
            return Err(Error::InvalidArgument(format!(
                "factors are {}x{} but the discretization is {}x{}",
                self.x.nrows(),
                self.v.nrows(),
                transport.n_cells(),
                transport.n_moments()
            )));
        }
        if r < 1 {
            return Err(Error::InvalidArgument("rank must be at least 1".into()));
        }
        Ok(())
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if all_finite(&self.s) && all_finite(&self.x) && all_finite(&self.v) {
            Ok(())
        } else {
            Err(Error::Blowup {
                step: self.step,
                time: self.t,
                what: "low-rank factors",
            })
        }
    }
}

/// Which truncation follows the Galerkin step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TruncationStrategy {
    #[default]
    Conservative,
    Standard,
}

/// Per-step parameters shared by the low-rank integrators.
#[derive(Debug, Clone)]
pub struct StepParams<'a> {
    pub sigma: f64,
    pub dt: f64,
    /// Per-cell isotropic source added to the zeroth moment.
    pub source: Option<&'a DVector<f64>>,
    pub truncation: TruncationConfig,
    pub strategy: TruncationStrategy,
    /// Permit `Δt > Δx`, outside the proven stability range.
    pub allow_large_dt: bool,
}

impl StepParams<'_> {
    pub(crate) fn check(&self, transport: &Transport) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "opacity must be non-negative, got {}",
                self.sigma
            )));
        }
        let dx = transport.mesh().min_dx();
        if !self.allow_large_dt && self.dt > dx * (1.0 + 1e-12) {
            return Err(Error::TimeStepTooLarge { dt: self.dt, dx });
        }
        if let Some(q) = self.source {
            if q.len() != transport.n_cells() {
                return Err(Error::InvalidArgument(format!(
                    "source has {} cells, expected {}",
                    q.len(),
                    transport.n_cells()
                )));
            }
        }
        self.truncation.validate()
    }
}
