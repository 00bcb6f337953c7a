use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dlra_trt::config::{load_config, parse_config_with, parse_override};
use dlra_trt::runner::{run, write_outputs};
use dlra_trt::Error;

/// Environment variable holding the default output directory.
const OUTPUT_DIR_ENV: &str = "DLRA_TRT_OUTPUT_DIR";

/// Run the full, low-rank or naive Su-Olson radiative transfer solver on a
/// bundled problem and write CSV snapshots and a history file.
#[derive(Debug, Parser)]
#[command(name = "dlra-trt", version)]
struct Cli {
    /// Configuration file (flat `key = value` with optional `[problem]` sections).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Solver: full, dlra or naive.
    #[arg(long, value_name = "NAME")]
    solver: Option<String>,

    /// Problem: plane_source, su_olson or beam_2d.
    #[arg(long, value_name = "NAME")]
    problem: Option<String>,

    /// Output directory [default: $DLRA_TRT_OUTPUT_DIR, else ./output].
    #[arg(long, value_name = "PATH")]
    output_dir: Option<PathBuf>,

    /// Override one configuration key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Print the resolved configuration and exit.
    #[arg(long)]
    dry_run: bool,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidArgument(_) | Error::TimeStepTooLarge { .. } => 2,
        Error::Blowup { .. } | Error::Numerical(_) | Error::RankOverflow { .. } => 3,
        Error::Io { .. } | Error::Parse { .. } => 1,
    }
}

fn main_inner(cli: Cli) -> Result<(), Error> {
    let mut overrides = Vec::new();
    if let Some(p) = &cli.problem {
        overrides.push(("problem".to_string(), p.clone()));
    }
    if let Some(s) = &cli.solver {
        overrides.push(("solver".to_string(), s.clone()));
    }
    for s in &cli.set {
        overrides.push(parse_override(s)?);
    }
    let config = match &cli.config {
        Some(path) => load_config(path, &overrides)?,
        None => parse_config_with("", &overrides)?,
    };
    if cli.dry_run {
        print!("{}", config.to_text());
        return Ok(());
    }
    let dir = cli
        .output_dir
        .or_else(|| config.output_dir.clone())
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("output"));

    let (problem, out) = run(&config)?;
    let history = out.history();
    let last = history.rows.last().expect("history has the initial row");
    println!(
        "{} / {}: t = {}, steps = {}, max rank = {}, rel mass err = {:.3e}, wall = {:.2} s",
        config.problem,
        config.solver,
        last.t,
        history.len() - 1,
        history.max_rank(),
        last.rel_mass_err,
        last.wall_s
    );
    for path in write_outputs(&config, problem.mesh(), &out, &dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
