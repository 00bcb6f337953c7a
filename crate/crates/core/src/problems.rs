//! Bundled test problems: the plane source, the Su-Olson problem and the 2D beam.

use std::f64::consts::PI;

use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::angular::{build_flux_matrix, build_pn_flux_matrices_2d, project_on_harmonics};
use crate::config::{ProblemKind, RunConfig};
use crate::error::{Error, Result};
use crate::spatial::{Grid1D, Mesh};
use crate::transport::Transport;

/// Width of the cutoff Gaussian initial condition in 1D.
pub const IC_WIDTH: f64 = 0.03;
/// Center of the 1D initial condition.
pub const IC_CENTER: f64 = 1.0;
/// Floor of the 1D initial condition.
pub const IC_FLOOR: f64 = 1e-4;
/// Half-width of the Su-Olson source slab `[−0.5, 0.5]`.
pub const SOURCE_HALF_WIDTH: f64 = 0.5;
/// Spatial and angular widths of the 2D beam.
pub const BEAM_WIDTH: f64 = 0.1;
/// Beam direction components `Ω₁ = Ω₃ = Ω⋆`.
pub const BEAM_DIRECTION: f64 = std::f64::consts::FRAC_1_SQRT_2;
pub const BEAM_AMPLITUDE: f64 = 1e6;
/// Projection loss above which the beam setup warns.
pub const BEAM_LOSS_WARNING: f64 = 0.05;

/// Discretization and initial data of one problem.
#[derive(Debug, Clone)]
pub struct ProblemSetup {
    pub transport: Transport,
    /// `n_cells × n_moments` initial moments.
    pub u0: DMatrix<f64>,
    pub b0: DVector<f64>,
    /// Per-cell isotropic source, `None` when identically zero.
    pub source: Option<DVector<f64>>,
    pub sigma: f64,
}

impl ProblemSetup {
    pub fn mesh(&self) -> &Mesh {
        self.transport.mesh()
    }
}

/// Cutoff Gaussian `max(1e-4, exp(−(x−1)²/(2σ²)) / √(2πσ²))` with `σ = 0.03`.
pub fn plane_source_profile(x: f64) -> f64 {
    let s2 = IC_WIDTH * IC_WIDTH;
    let g = (-(x - IC_CENTER).powi(2) / (2.0 * s2)).exp() / (2.0 * PI * s2).sqrt();
    g.max(IC_FLOOR)
}

/// Fraction of `[lo, hi]` covered by `[a, b]`.
pub fn overlap_fraction(lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    let len = (hi.min(b) - lo.max(a)).max(0.0);
    len / (hi - lo)
}

fn check_domain(config: &RunConfig, support: f64) {
    let half = 0.5 * (config.x_max - config.x_min);
    if support > half {
        warn!(
            "waves travel a distance {support} by t_end = {} but the half-domain is {half}; periodic wrap-around will pollute the solution",
            config.t_end
        );
    }
}

fn expect(config: &RunConfig, kind: ProblemKind) -> Result<()> {
    config.validate()?;
    if config.problem != kind {
        return Err(Error::InvalidArgument(format!(
            "config describes {}, not {kind}",
            config.problem
        )));
    }
    Ok(())
}

fn line_setup(config: &RunConfig, b0: f64) -> Result<(Transport, DMatrix<f64>, DVector<f64>)> {
    let grid = Grid1D::new(config.n_x, config.x_min, config.x_max)?;
    let mut u0 = DMatrix::zeros(config.n_x, config.n_moments);
    for (j, &x) in grid.centers.iter().enumerate() {
        u0[(j, 0)] = plane_source_profile(x);
    }
    let transport = Transport::new(Mesh::Line(grid), vec![build_flux_matrix(config.n_moments)?])?;
    Ok((transport, u0, DVector::from_element(config.n_x, b0)))
}

/// Isotropic cutoff Gaussian stored in the zeroth coefficient, `B⁰ ≡ b0`, no source.
pub fn plane_source_setup(config: &RunConfig) -> Result<ProblemSetup> {
    expect(config, ProblemKind::PlaneSource)?;
    check_domain(config, config.t_end);
    let (transport, u0, b0) = line_setup(config, config.b0)?;
    Ok(ProblemSetup {
        transport,
        u0,
        b0,
        source: None,
        sigma: config.sigma,
    })
}

/// Plane-source initial data with `B⁰ ≡ b0` and the slab source
/// `Q_j = (1/a_rad) · |cell_j ∩ [−0.5, 0.5]| / Δx`.
pub fn su_olson_setup(config: &RunConfig) -> Result<ProblemSetup> {
    expect(config, ProblemKind::SuOlson)?;
    check_domain(config, config.t_end + SOURCE_HALF_WIDTH);
    let (transport, u0, b0) = line_setup(config, config.b0)?;
    let grid = match transport.mesh() {
        Mesh::Line(g) => g,
        Mesh::Plane(..) => unreachable!(),
    };
    let source = DVector::from_iterator(
        grid.n_x,
        grid.centers.iter().map(|&x| {
            let lo = x - 0.5 * grid.dx;
            overlap_fraction(lo, lo + grid.dx, -SOURCE_HALF_WIDTH, SOURCE_HALF_WIDTH) / config.a_rad
        }),
    );
    Ok(ProblemSetup {
        transport,
        u0,
        b0,
        source: Some(source),
        sigma: config.sigma,
    })
}

/// Angular factor of the beam, a Gaussian in `(Ω₁, Ω₃)` around `(Ω⋆, Ω⋆)`.
pub fn beam_angular_profile(omega: [f64; 3]) -> f64 {
    let s2 = BEAM_WIDTH * BEAM_WIDTH;
    let d2 = (omega[0] - BEAM_DIRECTION).powi(2) + (omega[2] - BEAM_DIRECTION).powi(2);
    (-d2 / (2.0 * s2)).exp() / (2.0 * PI * s2)
}

/// Spatial factor of the beam including the amplitude `10⁶`.
pub fn beam_spatial_profile(x1: f64, x2: f64) -> f64 {
    let s2 = BEAM_WIDTH * BEAM_WIDTH;
    BEAM_AMPLITUDE * (-(x1 * x1 + x2 * x2) / (2.0 * s2)).exp() / (2.0 * PI * s2)
}

/// Harmonic coefficients of the beam's angular factor and the captured
/// fraction of its `L²` norm.
pub fn beam_angular_moments(n_pn: usize) -> (Vec<f64>, f64) {
    // Resolve the narrow Gaussian independently of n_pn.
    let n_mu = (2 * n_pn + 2).max(160);
    project_on_harmonics(n_pn, beam_angular_profile, n_mu, 2 * n_mu)
}

/// Rank-one beam: spatial Gaussian at cell centers times the projected
/// angular Gaussian. Streams along `Ω₁` in `x₁` and `Ω₃` in `x₂`.
pub fn beam_2d_setup(config: &RunConfig) -> Result<ProblemSetup> {
    expect(config, ProblemKind::Beam2d)?;
    check_domain(config, config.t_end);
    let g1 = Grid1D::new(config.n_x, config.x_min, config.x_max)?;
    let g2 = Grid1D::new(config.n_y, config.x_min, config.x_max)?;
    let mesh = Mesh::Plane(g1, g2);
    let (moments, captured) = beam_angular_moments(config.n_pn);
    if 1.0 - captured > BEAM_LOSS_WARNING {
        warn!(
            "degree {} captures only {:.1}% of the beam's angular L2 norm",
            config.n_pn,
            100.0 * captured
        );
    }
    let spatial = DVector::from_iterator(
        mesh.n_cells(),
        mesh.centers().iter().map(|c| beam_spatial_profile(c[0], c[1])),
    );
    let angular = DVector::from_vec(moments);
    let u0 = &spatial * angular.transpose();
    let (a1, a3) = build_pn_flux_matrices_2d(config.n_pn)?;
    let n = mesh.n_cells();
    let transport = Transport::new(mesh, vec![a1, a3])?;
    Ok(ProblemSetup {
        transport,
        u0,
        b0: DVector::from_element(n, config.b0),
        source: None,
        sigma: config.sigma,
    })
}

/// Dispatches on `config.problem`.
pub fn setup(config: &RunConfig) -> Result<ProblemSetup> {
    match config.problem {
        ProblemKind::PlaneSource => plane_source_setup(config),
        ProblemKind::SuOlson => su_olson_setup(config),
        ProblemKind::Beam2d => beam_2d_setup(config),
    }
}
