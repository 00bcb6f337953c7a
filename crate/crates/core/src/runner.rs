//! Time loops for the three solvers and CSV output of a finished run.

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{debug, info, warn};
use nalgebra::DVector;

use crate::config::{RunConfig, SolverKind};
use crate::diagnostics::{
    local_conservation_residual, temperature, total_energy, total_energy_low_rank, total_mass, History,
};
use crate::dlra::{dlra_step, LowRankState, StepParams};
use crate::error::Result;
use crate::full::{full_step, FullState};
use crate::io::{write_history, write_snapshot_1d, write_snapshot_2d, Snapshot1d, Snapshot2d};
use crate::naive::naive_step;
use crate::problems::{setup, ProblemSetup};
use crate::spatial::Mesh;
use crate::truncation::TruncationConfig;

/// Step sizes of at most `dt` from 0 to `t_end`, shortened so that every
/// time in `stops` and `t_end` itself is hit exactly.
pub fn step_schedule(t_end: f64, dt: f64, stops: &[f64]) -> Vec<f64> {
    let mut targets: Vec<f64> = stops.iter().copied().filter(|&s| s > 0.0 && s < t_end).collect();
    targets.push(t_end);
    let mut steps = Vec::new();
    let mut t = 0.0;
    for target in targets {
        while t < target {
            let remaining = target - t;
            let h = if remaining <= dt * (1.0 + 1e-12) { remaining } else { dt };
            steps.push(h);
            t = if h == remaining { target } else { t + h };
        }
    }
    steps
}

/// Scalar flux and internal energy at one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub phi: DVector<f64>,
    pub b: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct FullRun {
    pub state: FullState,
    pub history: History,
    pub snapshots: Vec<Snapshot>,
}

#[derive(Debug, Clone)]
pub struct LowRankRun {
    pub state: LowRankState,
    pub b: DVector<f64>,
    pub history: History,
    pub snapshots: Vec<Snapshot>,
    /// Largest per-cell local conservation residual over all steps.
    pub max_local_residual: f64,
}

/// Final state of either kind of run.
#[derive(Debug, Clone)]
pub enum RunOutput {
    Full(FullRun),
    LowRank(LowRankRun),
}

impl RunOutput {
    pub fn history(&self) -> &History {
        match self {
            RunOutput::Full(r) => &r.history,
            RunOutput::LowRank(r) => &r.history,
        }
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        match self {
            RunOutput::Full(r) => &r.snapshots,
            RunOutput::LowRank(r) => &r.snapshots,
        }
    }

    /// Scalar flux at the final time.
    pub fn phi(&self) -> DVector<f64> {
        match self {
            RunOutput::Full(r) => r.state.u.column(0).into_owned(),
            RunOutput::LowRank(r) => r.state.zeroth_moment(),
        }
    }
}

fn time_step(config: &RunConfig, mesh: &Mesh) -> f64 {
    config.cfl * mesh.min_dx()
}

fn wants_snapshot(config: &RunConfig, t: f64) -> bool {
    config.snapshot_times.contains(&t)
}

fn log_progress(step: usize, total: usize, t: f64, rank: usize) {
    if total >= 10 && step.is_multiple_of(total / 10) {
        info!("step {step}/{total}, t = {t:.4}, rank {rank}");
    } else {
        debug!("step {step}/{total}, t = {t:.6}, rank {rank}");
    }
}

/// Runs the full-order solver on a prepared problem.
pub fn run_full_setup(config: &RunConfig, problem: &ProblemSetup) -> Result<FullRun> {
    let transport = &problem.transport;
    let mesh = transport.mesh();
    let start = Instant::now();
    let mut state = FullState::new(problem.u0.clone(), problem.b0.clone())?;
    let mut history = History::default();
    let mut snapshots = Vec::new();
    let observe = |s: &FullState, h: &mut History, snaps: &mut Vec<Snapshot>, wall: f64| {
        let phi = s.u.column(0).into_owned();
        h.record(s.t, s.u.ncols(), total_mass(&phi, &s.b, mesh), total_energy(&s.u, &s.b), wall);
        if wants_snapshot(config, s.t) {
            snaps.push(Snapshot { t: s.t, phi, b: s.b.clone() });
        }
    };
    observe(&state, &mut history, &mut snapshots, 0.0);
    let steps = step_schedule(config.t_end, time_step(config, mesh), &config.snapshot_times);
    let n_steps = steps.len();
    for (n, dt) in steps.into_iter().enumerate() {
        let target = state.t + dt;
        state = full_step(&state, transport, problem.sigma, dt, problem.source.as_ref())?;
        state.t = snap_time(config, target);
        observe(&state, &mut history, &mut snapshots, start.elapsed().as_secs_f64());
        log_progress(n + 1, n_steps, state.t, state.u.ncols());
    }
    push_final(&mut snapshots, state.t, state.u.column(0).into_owned(), &state.b);
    Ok(FullRun { state, history, snapshots })
}

/// Rounds accumulated time onto the nearest requested stop.
fn snap_time(config: &RunConfig, t: f64) -> f64 {
    config
        .snapshot_times
        .iter()
        .copied()
        .chain(std::iter::once(config.t_end))
        .find(|&s| (s - t).abs() <= 1e-12 * s.abs().max(1.0))
        .unwrap_or(t)
}

fn push_final(snapshots: &mut Vec<Snapshot>, t: f64, phi: DVector<f64>, b: &DVector<f64>) {
    if snapshots.last().is_none_or(|s| s.t != t) {
        snapshots.push(Snapshot { t, phi, b: b.clone() });
    }
}

fn run_low_rank(config: &RunConfig, problem: &ProblemSetup, naive: bool) -> Result<LowRankRun> {
    let transport = &problem.transport;
    let mesh = transport.mesh();
    let start = Instant::now();
    let max_rank = problem.u0.nrows().min(problem.u0.ncols());
    if config.r_start > max_rank {
        warn!("r_start = {} exceeds the largest possible rank {max_rank}; starting at {max_rank}", config.r_start);
    }
    let mut state = LowRankState::from_dense(&problem.u0, config.r_start.min(max_rank))?;
    let mut b = problem.b0.clone();
    let mut history = History::default();
    let mut snapshots = Vec::new();
    let observe = |s: &LowRankState, b: &DVector<f64>, h: &mut History, snaps: &mut Vec<Snapshot>, wall: f64| {
        let phi = s.zeroth_moment();
        h.record(s.t, s.rank(), total_mass(&phi, b, mesh), total_energy_low_rank(s, b), wall);
        if wants_snapshot(config, s.t) {
            snaps.push(Snapshot { t: s.t, phi, b: b.clone() });
        }
    };
    observe(&state, &b, &mut history, &mut snapshots, 0.0);
    let steps = step_schedule(config.t_end, time_step(config, mesh), &config.snapshot_times);
    let n_steps = steps.len();
    let mut max_local_residual: f64 = 0.0;
    for (n, dt) in steps.into_iter().enumerate() {
        let params = StepParams {
            sigma: problem.sigma,
            dt,
            source: problem.source.as_ref(),
            truncation: TruncationConfig::relative(config.theta_rel, config.r_min, config.r_max),
            strategy: config.truncation,
            allow_large_dt: config.allow_large_dt,
        };
        let target = state.t + dt;
        let (mut next, b1) = if naive {
            naive_step(&state, &b, transport, &params)?
        } else {
            dlra_step(&state, &b, transport, &params)?
        };
        next.t = snap_time(config, target);
        let residual = local_conservation_residual(
            transport,
            &state,
            &next,
            &b1,
            problem.sigma,
            dt,
            problem.source.as_ref(),
        );
        max_local_residual = max_local_residual.max(residual.amax());
        state = next;
        b = b1;
        observe(&state, &b, &mut history, &mut snapshots, start.elapsed().as_secs_f64());
        log_progress(n + 1, n_steps, state.t, state.rank());
    }
    push_final(&mut snapshots, state.t, state.zeroth_moment(), &b);
    Ok(LowRankRun {
        state,
        b,
        history,
        snapshots,
        max_local_residual,
    })
}

/// Runs the energy-stable low-rank solver on a prepared problem.
pub fn run_dlra_setup(config: &RunConfig, problem: &ProblemSetup) -> Result<LowRankRun> {
    run_low_rank(config, problem, false)
}

/// Runs the naive low-rank solver on a prepared problem.
pub fn run_naive_setup(config: &RunConfig, problem: &ProblemSetup) -> Result<LowRankRun> {
    run_low_rank(config, problem, true)
}

pub fn run_full(config: &RunConfig) -> Result<FullRun> {
    run_full_setup(config, &setup(config)?)
}

pub fn run_dlra(config: &RunConfig) -> Result<LowRankRun> {
    run_dlra_setup(config, &setup(config)?)
}

pub fn run_naive(config: &RunConfig) -> Result<LowRankRun> {
    run_naive_setup(config, &setup(config)?)
}

/// Sets up the configured problem and runs the configured solver.
pub fn run(config: &RunConfig) -> Result<(ProblemSetup, RunOutput)> {
    config.validate()?;
    let problem = setup(config)?;
    let out = match config.solver {
        SolverKind::Full => RunOutput::Full(run_full_setup(config, &problem)?),
        SolverKind::Dlra => RunOutput::LowRank(run_dlra_setup(config, &problem)?),
        SolverKind::Naive => RunOutput::LowRank(run_naive_setup(config, &problem)?),
    };
    Ok((problem, out))
}

/// File name of a snapshot, e.g. `plane_source_dlra_t8.000000.csv`.
pub fn snapshot_file_name(config: &RunConfig, t: f64) -> String {
    format!("{}_{}_t{t:.6}.csv", config.problem, config.solver)
}

pub fn history_file_name(config: &RunConfig) -> String {
    format!("{}_{}_history.csv", config.problem, config.solver)
}

/// Writes every snapshot and the history to `dir`; returns the written paths.
pub fn write_outputs(config: &RunConfig, mesh: &Mesh, out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for snap in out.snapshots() {
        let path = dir.join(snapshot_file_name(config, snap.t));
        let temp = temperature(&snap.b, config.a_rad);
        match mesh {
            Mesh::Line(g) => write_snapshot_1d(
                &path,
                &Snapshot1d {
                    x: g.centers.clone(),
                    phi: snap.phi.as_slice().to_vec(),
                    temperature: temp.as_slice().to_vec(),
                    b: snap.b.as_slice().to_vec(),
                },
            )?,
            Mesh::Plane(..) => {
                let centers = mesh.centers();
                write_snapshot_2d(
                    &path,
                    &Snapshot2d {
                        x1: centers.iter().map(|c| c[0]).collect(),
                        x2: centers.iter().map(|c| c[1]).collect(),
                        phi: snap.phi.as_slice().to_vec(),
                        temperature: temp.as_slice().to_vec(),
                    },
                )?
            }
        }
        written.push(path);
    }
    let path = dir.join(history_file_name(config));
    write_history(&path, out.history())?;
    written.push(path);
    Ok(written)
}
