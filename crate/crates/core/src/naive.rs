//! The naive IMEX low-rank scheme: streaming explicit, internal energy
//! explicit in the radiation equations, self-absorption implicit. It is not
//! energy stable; [`build_counterexample`] constructs data on which a single
//! step increases the total energy.

use nalgebra::{DMatrix, DVector};

use crate::dlra::{LowRankState, StepParams};
use crate::error::{Error, Result};
use crate::linalg::{all_finite, hstack, qr};
use crate::spatial::Mesh;
use crate::transport::Transport;
use crate::truncation::truncate_standard;

/// One naive step followed by standard truncation; `params.strategy` is ignored.
pub fn naive_step(
    state: &LowRankState,
    b0: &DVector<f64>,
    transport: &Transport,
    params: &StepParams<'_>,
) -> Result<(LowRankState, DVector<f64>)> {
    params.check(transport)?;
    state.validate(transport)?;
    if b0.len() != transport.n_cells() {
        return Err(Error::InvalidArgument(format!(
            "internal energy has {} cells, expected {}",
            b0.len(),
            transport.n_cells()
        )));
    }
    let dt = params.dt;
    let k = params.sigma * dt;
    let damping = 1.0 / (1.0 + k);
    let step = state.step + 1;
    let time = state.t + dt;
    // Explicit zeroth-moment forcing: emission σΔt·B⁰ plus Δt·Q.
    let mut forcing = b0 * k;
    if let Some(q) = params.source {
        forcing.axpy(dt, q, 1.0);
    }

    let k0 = &state.x * &state.s;
    let mut k1 = &k0 + transport.k_rhs(&k0, &state.v) * dt;
    k1 += &forcing * state.v.row(0);
    k1 *= damping;

    let l0 = &state.v * state.s.transpose();
    let mut l1 = &l0 + transport.l_rhs(&l0, &state.x) * dt;
    let projected = (state.x.transpose() * &forcing).transpose();
    let mut row0 = l1.row_mut(0);
    row0 += &projected;
    l1 *= damping;

    let x_hat = qr(&hstack(&k1, &state.x)).0;
    let v_hat = qr(&hstack(&l1, &state.v)).0;
    let s_tilde = (x_hat.transpose() * &state.x) * &state.s * (state.v.transpose() * &v_hat);

    let mut s1 = &s_tilde + transport.s_rhs(&x_hat, &s_tilde, &v_hat) * dt;
    s1 += (x_hat.transpose() * &forcing) * v_hat.row(0);
    s1 *= damping;

    let phi = &x_hat * (&s1 * v_hat.row(0).transpose());
    let b1 = (b0 + phi * k) * damping;

    if !all_finite(&s1) || !b1.iter().all(|v| v.is_finite()) {
        return Err(Error::Blowup {
            step,
            time,
            what: "coefficients",
        });
    }
    let truncated = truncate_standard(&x_hat, &s1, &v_hat, &params.truncation)?;
    let next = LowRankState::from_factors(truncated, time, step);
    next.check_finite()?;
    Ok((next, b1))
}

/// Parameters of the energy-increasing spatially constant initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterexampleSpec {
    pub sigma: f64,
    pub dt: f64,
    /// Equilibrium value reached by the zeroth moment after one step.
    pub u1: f64,
    /// Perturbation, strictly inside `(0, alpha_bound())`.
    pub alpha: f64,
}

impl CounterexampleSpec {
    /// Upper end `σΔt·u¹ / (1 + σΔt + σ²Δt² + ½σ³Δt³)` of the admissible interval.
    pub fn alpha_bound(&self) -> f64 {
        let k = self.sigma * self.dt;
        k * self.u1 / (1.0 + k + k * k + 0.5 * k * k * k)
    }

    pub fn validate(&self) -> Result<()> {
        let bound = self.alpha_bound();
        if !(self.alpha > 0.0 && self.alpha < bound) {
            return Err(Error::InvalidArgument(format!(
                "alpha = {} must lie in (0, {bound})",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Initial internal energy `u¹ + α(1 + σΔt)`.
    pub fn b0(&self) -> f64 {
        self.u1 + self.alpha * (1.0 + self.sigma * self.dt)
    }

    /// Initial zeroth moment `u¹ − σΔt·α(1 + σΔt)`.
    pub fn u0(&self) -> f64 {
        let k = self.sigma * self.dt;
        self.u1 - k * self.alpha * (1.0 + k)
    }

    /// Per-cell energy increase of one naive step,
    /// `σ²Δt²αu¹ − σΔtα² − ½σ²Δt²α² − ½σ²Δt²α²(1+σΔt)²`.
    pub fn energy_increase_per_cell(&self) -> f64 {
        let k = self.sigma * self.dt;
        let a = self.alpha;
        k * k * a * self.u1 - k * a * a - 0.5 * k * k * a * a - 0.5 * k * k * a * a * (1.0 + k).powi(2)
    }
}

/// Spatially constant low-rank state of rank 2 (constant spatial mode and
/// `e₁`, padded) and internal energy on `mesh`, reproducing the equilibrium
/// `(u¹, u¹ + α)` after one naive step.
pub fn build_counterexample(
    spec: &CounterexampleSpec,
    mesh: &Mesh,
    n_moments: usize,
) -> Result<(LowRankState, DVector<f64>)> {
    spec.validate()?;
    let n = mesh.n_cells();
    if n_moments < 2 || n < 2 {
        return Err(Error::InvalidArgument(
            "counterexample needs at least 2 cells and 2 moments".into(),
        ));
    }
    let mut u = DMatrix::zeros(n, n_moments);
    u.column_mut(0).fill(spec.u0());
    let state = LowRankState::from_dense(&u, 2)?;
    Ok((state, DVector::from_element(n, spec.b0())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let spec = CounterexampleSpec { sigma: 1.0, dt: 1.0, u1: 1.0, alpha: 0.2 };
        assert!((spec.alpha_bound() - 1.0 / 3.5).abs() < 1e-15);
        assert!((spec.b0() - 1.4).abs() < 1e-15);
        assert!((spec.u0() - 0.6).abs() < 1e-15);
        assert!((spec.energy_increase_per_cell() - 0.06).abs() < 1e-15);
        let half = CounterexampleSpec { sigma: 1.0, dt: 0.5, u1: 1.0, alpha: 0.1 };
        assert!((half.energy_increase_per_cell() - 0.0159375).abs() < 1e-15);
        let tiny = CounterexampleSpec { alpha: 1e-9, ..spec };
        assert!(tiny.energy_increase_per_cell().abs() < 1e-9);
    }

    #[test]
    fn alpha_outside_interval_rejected() {
        let spec = CounterexampleSpec { sigma: 1.0, dt: 1.0, u1: 1.0, alpha: 0.3 };
        assert!(spec.validate().is_err());
        assert!(CounterexampleSpec { alpha: 0.0, ..spec }.validate().is_err());
    }
}
