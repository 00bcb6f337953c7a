use std::path::PathBuf;

use crate::config::ConfigError;

/// Errors raised by the solvers, problem setup and output layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A non-finite value appeared in the solution.
    #[error("numerical blowup at step {step} (t = {time}): {what} is not finite")]
    Blowup {
        step: usize,
        time: f64,
        what: &'static str,
    },

    #[error(
        "truncation needs rank {required} but r_max is {r_max}; increase theta_rel or r_max"
    )]
    RankOverflow { required: usize, r_max: usize },

    #[error("time step {dt} exceeds the stable limit dx = {dx}; set allow_large_dt to override")]
    TimeStepTooLarge { dt: f64, dx: f64 },

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
