//! Energy, mass, scalar flux, temperature and the per-step local
//! conservation residual.

use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::dlra::LowRankState;
use crate::spatial::Mesh;
use crate::transport::Transport;

/// `½‖u‖_F² + ½‖B‖²`.
pub fn total_energy(u: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
    0.5 * u.norm_squared() + 0.5 * b.norm_squared()
}

/// `½‖S‖_F² + ½‖B‖²`, equal to [`total_energy`] of the densified state.
pub fn total_energy_low_rank(state: &LowRankState, b: &DVector<f64>) -> f64 {
    0.5 * state.s.norm_squared() + 0.5 * b.norm_squared()
}

/// Cell-volume weighted `Σ_j (u_{j0} + B_j)`, summed with Neumaier
/// compensation.
pub fn total_mass(phi: &DVector<f64>, b: &DVector<f64>, mesh: &Mesh) -> f64 {
    mesh.cell_volume() * compensated_sum(phi.iter().chain(b.iter()).copied())
}

fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0_f64, 0.0_f64);
    for v in values {
        let t = sum + v;
        carry += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + carry
}

/// Scalar flux `Φ_j = u_{j0}` of a dense state.
pub fn scalar_flux(u: &DMatrix<f64>) -> DVector<f64> {
    u.column(0).into_owned()
}

/// `T_j = (B_j / a_rad)^{1/4}`; negative energies are floored at zero.
pub fn temperature(b: &DVector<f64>, a_rad: f64) -> DVector<f64> {
    let negative = b.iter().filter(|&&v| v < 0.0).count();
    if negative > 0 {
        warn!("{negative} cells have negative internal energy; temperature floored at 0");
    }
    b.map(|v| (v.max(0.0) / a_rad).powf(0.25))
}

/// Per-cell residual of the discrete zeroth-moment balance over one step,
/// `Φ¹ − Φ⁰ − Δt F(u⁰)₀ − σΔt(B¹ − Φ¹) − Δt Q`.
#[allow(clippy::too_many_arguments)]
pub fn local_conservation_residual(
    transport: &Transport,
    before: &LowRankState,
    after: &LowRankState,
    b_after: &DVector<f64>,
    sigma: f64,
    dt: f64,
    source: Option<&DVector<f64>>,
) -> DVector<f64> {
    let k0 = &before.x * &before.s;
    let flux = transport.rhs_zeroth(&k0, &before.v);
    let phi0 = before.zeroth_moment();
    let phi1 = after.zeroth_moment();
    let mut r = &phi1 - &phi0 - flux * dt - (b_after - &phi1) * (sigma * dt);
    if let Some(q) = source {
        r.axpy(-dt, q, 1.0);
    }
    r
}

/// Relative mass error `|m⁰ − mⁿ| / |m⁰|`.
pub fn relative_mass_error(m0: f64, m: f64) -> f64 {
    if m0 == 0.0 {
        (m - m0).abs()
    } else {
        (m - m0).abs() / m0.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub t: f64,
    pub rank: usize,
    pub mass: f64,
    pub energy: f64,
    pub rel_mass_err: f64,
    pub wall_s: f64,
}

/// Time series of rank, mass and energy, one row per time level.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    pub rows: Vec<HistoryRow>,
}

impl History {
    /// Appends a row; the relative mass error is taken against the first row.
    pub fn record(&mut self, t: f64, rank: usize, mass: f64, energy: f64, wall_s: f64) {
        let m0 = self.rows.first().map_or(mass, |r| r.mass);
        self.rows.push(HistoryRow {
            t,
            rank,
            mass,
            energy,
            rel_mass_err: relative_mass_error(m0, mass),
            wall_s,
        });
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn max_rank(&self) -> usize {
        self.rows.iter().map(|r| r.rank).max().unwrap_or(0)
    }

    pub fn max_rel_mass_err(&self) -> f64 {
        self.rows.iter().map(|r| r.rel_mass_err).fold(0.0, f64::max)
    }

    /// Largest `E^{n+1} − E^n`, or `−∞` with fewer than two rows.
    pub fn max_energy_increase(&self) -> f64 {
        self.rows
            .windows(2)
            .map(|w| w[1].energy - w[0].energy)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
