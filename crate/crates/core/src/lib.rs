//! Energy-stable, locally mass-conservative dynamical low-rank solvers for
//! the Su-Olson thermal radiative transfer system in slab (1D, Legendre
//! moments) and planar (2D, real spherical harmonics) geometry.
//!
//! The crate provides
//! - a full-order moment solver ([`full`]),
//! - the rank-adaptive basis-update & Galerkin low-rank integrator with
//!   conservative truncation ([`dlra`], [`truncation`]),
//! - the naive IMEX low-rank scheme and data on which it gains energy ([`naive`]),
//! - the plane-source, Su-Olson and 2D beam problems ([`problems`]),
//! - configuration, diagnostics, CSV output and run drivers.
//!
//! Moments are stored as `n_cells × n_moments` matrices `u`, with the zeroth
//! column `u_{·0}` taken as the scalar flux and `B` the internal energy.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod config;
pub mod diagnostics;
pub mod dlra;
pub mod error;
pub mod full;
pub mod io;
pub mod linalg;
pub mod naive;
pub mod problems;
pub mod runner;
pub mod spatial;
pub mod transport;
pub mod truncation;

pub use config::{parse_config, ProblemKind, RunConfig, SolverKind};
pub use dlra::{dlra_step, LowRankState, StepParams, TruncationStrategy};
pub use error::{Error, Result};
pub use full::{full_step, FullState};
pub use naive::naive_step;
pub use transport::Transport;
