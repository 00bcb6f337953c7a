//! Run configuration: a flat `key = value` text format with optional
//! `[problem]` sections.
//!
//! ```text
//! # plane source at reduced resolution
//! problem = plane_source
//! solver = dlra
//!
//! [plane_source]
//! n_x = 200
//! n_moments = 100
//! snapshot_times = 2, 4
//! ```
//!
//! Keys outside a section apply to every problem; keys inside `[name]` apply
//! only when `problem = name`, after the global keys. Omitted keys take the
//! defaults of the selected problem.
//!
//! | key | meaning |
//! |-----|---------|
//! | `problem` | `plane_source`, `su_olson` or `beam_2d` |
//! | `solver` | `full`, `dlra` or `naive` |
//! | `n_x`, `n_y` | cell counts (`n_y` only in 2D) |
//! | `n_moments` | Legendre moments (1D) |
//! | `n_pn` | spherical-harmonic degree (2D) |
//! | `cfl` | `Δt = cfl · Δx` |
//! | `t_end` | final time |
//! | `sigma` | opacity |
//! | `theta_rel` | truncation tolerance relative to the largest singular value |
//! | `r_start`, `r_min`, `r_max` | initial rank and rank bounds |
//! | `a_rad` | radiation constant in `B = a_rad T⁴` |
//! | `b0` | initial internal energy |
//! | `x_min`, `x_max` | domain bounds (square domain in 2D) |
//! | `snapshot_times` | comma-separated output times in `[0, t_end]` |
//! | `allow_large_dt` | permit `cfl > 1` |
//! | `truncation` | `conservative` or `standard` |
//! | `output_dir` | directory for CSV output |

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dlra::TruncationStrategy;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("unknown section [{0}]")]
    UnknownSection(String),

    #[error("key `{key}` given twice (line {line})")]
    DuplicateKey { key: String, line: usize },

    #[error("key `{key}`: cannot parse `{value}` as {expected}")]
    InvalidValue {
        key: String,
        value: String,
        expected: &'static str,
    },

    #[error("key `{key}`: {message}")]
    Constraint { key: &'static str, message: String },
}

type ConfigResult<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    PlaneSource,
    SuOlson,
    Beam2d,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 3] = [ProblemKind::PlaneSource, ProblemKind::SuOlson, ProblemKind::Beam2d];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::PlaneSource => "plane_source",
            ProblemKind::SuOlson => "su_olson",
            ProblemKind::Beam2d => "beam_2d",
        }
    }

    pub fn dimension(self) -> usize {
        match self {
            ProblemKind::Beam2d => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        ProblemKind::ALL.into_iter().find(|p| p.name() == s).ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Full,
    Dlra,
    Naive,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Full => "full",
            SolverKind::Dlra => "dlra",
            SolverKind::Naive => "naive",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "full" => Ok(SolverKind::Full),
            "dlra" => Ok(SolverKind::Dlra),
            "naive" => Ok(SolverKind::Naive),
            _ => Err(()),
        }
    }
}

fn strategy_name(s: TruncationStrategy) -> &'static str {
    match s {
        TruncationStrategy::Conservative => "conservative",
        TruncationStrategy::Standard => "standard",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub solver: SolverKind,
    pub n_x: usize,
    pub n_y: usize,
    pub n_moments: usize,
    pub n_pn: usize,
    pub cfl: f64,
    pub t_end: f64,
    pub sigma: f64,
    pub theta_rel: f64,
    pub r_start: usize,
    pub r_min: usize,
    pub r_max: usize,
    pub a_rad: f64,
    pub b0: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub snapshot_times: Vec<f64>,
    pub allow_large_dt: bool,
    pub truncation: TruncationStrategy,
    pub output_dir: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "problem",
    "solver",
    "n_x",
    "n_y",
    "n_moments",
    "n_pn",
    "cfl",
    "t_end",
    "sigma",
    "theta_rel",
    "r_start",
    "r_min",
    "r_max",
    "a_rad",
    "b0",
    "x_min",
    "x_max",
    "snapshot_times",
    "allow_large_dt",
    "truncation",
    "output_dir",
];

fn parse_value<T: FromStr>(key: &str, value: &str, expected: &'static str) -> ConfigResult<T> {
    value.parse().map_err(|_| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        expected,
    })
}

fn parse_float(key: &str, value: &str) -> ConfigResult<f64> {
    let v: f64 = parse_value(key, value, "a number")?;
    if !v.is_finite() {
        return Err(ConfigError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
            expected: "a finite number",
        });
    }
    Ok(v)
}

impl RunConfig {
    /// Settings of the bundled problem at full resolution.
    pub fn defaults(problem: ProblemKind) -> Self {
        let base = RunConfig {
            problem,
            solver: SolverKind::Dlra,
            n_x: 1000,
            n_y: 1,
            n_moments: 500,
            n_pn: 1,
            cfl: 0.99,
            t_end: 8.0,
            sigma: 1.0,
            theta_rel: 0.1,
            r_start: 20,
            r_min: 1,
            r_max: 250,
            a_rad: 1.0,
            b0: 1.0,
            x_min: -10.0,
            x_max: 10.0,
            snapshot_times: Vec::new(),
            allow_large_dt: false,
            truncation: TruncationStrategy::Conservative,
            output_dir: None,
        };
        match problem {
            ProblemKind::PlaneSource => base,
            ProblemKind::SuOlson => RunConfig {
                t_end: 3.16,
                theta_rel: 1e-2,
                b0: 50.0,
                ..base
            },
            ProblemKind::Beam2d => RunConfig {
                n_x: 500,
                n_y: 500,
                n_moments: 0,
                n_pn: 29,
                cfl: 0.7,
                t_end: 0.5,
                sigma: 0.5,
                theta_rel: 5e-4,
                r_start: 100,
                r_max: 100,
                x_min: -1.0,
                x_max: 1.0,
                ..base
            },
        }
    }

    /// Number of angular moments of the selected discretization.
    pub fn moment_count(&self) -> usize {
        match self.problem.dimension() {
            2 => (self.n_pn + 1) * (self.n_pn + 1),
            _ => self.n_moments,
        }
    }

    pub fn cell_count(&self) -> usize {
        match self.problem.dimension() {
            2 => self.n_x * self.n_y,
            _ => self.n_x,
        }
    }

    /// Sets one key from its textual value. `problem` is rejected here since
    /// it selects the defaults and must be resolved first.
    pub fn set(&mut self, key: &str, value: &str) -> ConfigResult<()> {
        match key {
            "problem" => {
                let p: ProblemKind = parse_value(key, value, "plane_source, su_olson or beam_2d")?;
                if p != self.problem {
                    return Err(ConfigError::Constraint {
                        key: "problem",
                        message: format!("cannot change problem from {} to {p} after defaults are applied", self.problem),
                    });
                }
            }
            "solver" => self.solver = parse_value(key, value, "full, dlra or naive")?,
            "n_x" => self.n_x = parse_value(key, value, "a cell count")?,
            "n_y" => self.n_y = parse_value(key, value, "a cell count")?,
            "n_moments" => self.n_moments = parse_value(key, value, "a moment count")?,
            "n_pn" => self.n_pn = parse_value(key, value, "a harmonic degree")?,
            "cfl" => self.cfl = parse_float(key, value)?,
            "t_end" => self.t_end = parse_float(key, value)?,
            "sigma" => self.sigma = parse_float(key, value)?,
            "theta_rel" => self.theta_rel = parse_float(key, value)?,
            "r_start" => self.r_start = parse_value(key, value, "a rank")?,
            "r_min" => self.r_min = parse_value(key, value, "a rank")?,
            "r_max" => self.r_max = parse_value(key, value, "a rank")?,
            "a_rad" => self.a_rad = parse_float(key, value)?,
            "b0" => self.b0 = parse_float(key, value)?,
            "x_min" => self.x_min = parse_float(key, value)?,
            "x_max" => self.x_max = parse_float(key, value)?,
            "snapshot_times" => {
                self.snapshot_times = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_float(key, s))
                    .collect::<ConfigResult<_>>()?;
            }
            "allow_large_dt" => self.allow_large_dt = parse_value(key, value, "true or false")?,
            "truncation" => {
                self.truncation = match value {
                    "conservative" => TruncationStrategy::Conservative,
                    "standard" => TruncationStrategy::Standard,
                    _ => {
                        return Err(ConfigError::InvalidValue {
                            key: key.to_string(),
                            value: value.to_string(),
                            expected: "conservative or standard",
                        })
                    }
                }
            }
            "output_dir" => {
                self.output_dir = if value.is_empty() { None } else { Some(PathBuf::from(value)) }
            }
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> ConfigResult<()> {
        let fail = |key: &'static str, message: String| Err(ConfigError::Constraint { key, message });
        if !(self.cfl > 0.0) {
            return fail("cfl", format!("must be positive, got {}", self.cfl));
        }
        if self.cfl > 1.0 && !self.allow_large_dt {
            return fail(
                "cfl",
                format!(
                    "{} exceeds 1; energy stability requires dt <= dx (set allow_large_dt = true to override)",
                    self.cfl
                ),
            );
        }
        if !(self.t_end >= 0.0) {
            return fail("t_end", format!("must be non-negative, got {}", self.t_end));
        }
        if self.n_x < 3 {
            return fail("n_x", format!("need at least 3 cells, got {}", self.n_x));
        }
        if self.problem.dimension() == 2 {
            if self.n_y < 3 {
                return fail("n_y", format!("need at least 3 cells, got {}", self.n_y));
            }
            if self.n_pn < 1 {
                return fail("n_pn", "need degree at least 1".into());
            }
        } else if self.n_moments < 2 {
            return fail("n_moments", format!("need at least 2 moments, got {}", self.n_moments));
        }
        if !(self.sigma >= 0.0) {
            return fail("sigma", format!("must be non-negative, got {}", self.sigma));
        }
        if !(self.theta_rel >= 0.0) {
            return fail("theta_rel", format!("must be non-negative, got {}", self.theta_rel));
        }
        if !(self.a_rad > 0.0) {
            return fail("a_rad", format!("must be positive, got {}", self.a_rad));
        }
        if !(self.b0 >= 0.0) {
            return fail("b0", format!("must be non-negative, got {}", self.b0));
        }
        if !(self.x_max > self.x_min) {
            return fail("x_max", format!("must exceed x_min = {}", self.x_min));
        }
        if self.r_min < 1 || self.r_min > self.r_max {
            return fail(
                "r_min",
                format!("need 1 <= r_min <= r_max, got r_min = {}, r_max = {}", self.r_min, self.r_max),
            );
        }
        if self.r_start < self.r_min || self.r_start > self.r_max {
            return fail(
                "r_start",
                format!("{} must lie in [r_min, r_max] = [{}, {}]", self.r_start, self.r_min, self.r_max),
            );
        }
        if self
            .snapshot_times
            .iter()
            .any(|&t| !(t >= 0.0) || t > self.t_end)
        {
            return fail("snapshot_times", format!("all times must lie in [0, {}]", self.t_end));
        }
        if self.snapshot_times.windows(2).any(|w| w[0] >= w[1]) {
            return fail("snapshot_times", "times must be strictly increasing".into());
        }
        Ok(())
    }

    /// Serializes every key. Floats use the shortest representation that
    /// parses back to the same value.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "problem = {}", self.problem);
        let _ = writeln!(out, "solver = {}", self.solver);
        if let Some(dir) = &self.output_dir {
            let _ = writeln!(out, "output_dir = {}", dir.display());
        }
        let _ = writeln!(out, "\n[{}]", self.problem);
        let _ = writeln!(out, "n_x = {}", self.n_x);
        let _ = writeln!(out, "n_y = {}", self.n_y);
        let _ = writeln!(out, "n_moments = {}", self.n_moments);
        let _ = writeln!(out, "n_pn = {}", self.n_pn);
        for (key, v) in [
            ("cfl", self.cfl),
            ("t_end", self.t_end),
            ("sigma", self.sigma),
            ("theta_rel", self.theta_rel),
        ] {
            let _ = writeln!(out, "{key} = {v:?}");
        }
        let _ = writeln!(out, "r_start = {}", self.r_start);
        let _ = writeln!(out, "r_min = {}", self.r_min);
        let _ = writeln!(out, "r_max = {}", self.r_max);
        for (key, v) in [("a_rad", self.a_rad), ("b0", self.b0), ("x_min", self.x_min), ("x_max", self.x_max)] {
            let _ = writeln!(out, "{key} = {v:?}");
        }
        let times: Vec<String> = self.snapshot_times.iter().map(|t| format!("{t:?}")).collect();
        let _ = writeln!(out, "snapshot_times = {}", times.join(", "));
        let _ = writeln!(out, "allow_large_dt = {}", self.allow_large_dt);
        let _ = writeln!(out, "truncation = {}", strategy_name(self.truncation));
        out
    }
}

/// A `key = value` line with its 1-based line number (0 for overrides).
#[derive(Debug, Clone, PartialEq)]
struct Entry {
    key: String,
    value: String,
    line: usize,
}

struct Document {
    global: Vec<Entry>,
    sections: Vec<(ProblemKind, Vec<Entry>)>,
}

fn parse_document(text: &str) -> ConfigResult<Document> {
    let mut doc = Document {
        global: Vec::new(),
        sections: Vec::new(),
    };
    let mut current: Option<usize> = None;
    let mut seen: HashSet<(Option<ProblemKind>, String)> = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line,
                message: "section header must end with `]`".into(),
            })?;
            let name = name.trim();
            let kind: ProblemKind = name
                .parse()
                .map_err(|_| ConfigError::UnknownSection(name.to_string()))?;
            current = Some(match doc.sections.iter().position(|(k, _)| *k == kind) {
                Some(i) => i,
                None => {
                    doc.sections.push((kind, Vec::new()));
                    doc.sections.len() - 1
                }
            });
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                message: "missing key before `=`".into(),
            });
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        let section = current.map(|i| doc.sections[i].0);
        if section.is_some() && key == "problem" {
            return Err(ConfigError::Syntax {
                line,
                message: "`problem` must be set outside sections".into(),
            });
        }
        if !seen.insert((section, key.to_string())) {
            return Err(ConfigError::DuplicateKey {
                key: key.to_string(),
                line,
            });
        }
        let entry = Entry {
            key: key.to_string(),
            value: value.to_string(),
            line,
        };
        match current {
            Some(i) => doc.sections[i].1.push(entry),
            None => doc.global.push(entry),
        }
    }
    Ok(doc)
}

/// Splits a command-line override `key=value`.
pub fn parse_override(s: &str) -> ConfigResult<(String, String)> {
    let (key, value) = s.split_once('=').ok_or_else(|| ConfigError::Syntax {
        line: 0,
        message: format!("override `{s}` is not of the form key=value"),
    })?;
    let key = key.trim();
    if !KEYS.contains(&key) {
        return Err(ConfigError::UnknownKey(key.to_string()));
    }
    Ok((key.to_string(), value.trim().to_string()))
}

/// Parses configuration text, then applies `overrides` in order. The
/// problem is taken from the last `problem` override, else from the text,
/// else `plane_source`.
pub fn parse_config_with(text: &str, overrides: &[(String, String)]) -> ConfigResult<RunConfig> {
    let doc = parse_document(text)?;
    let lookup_problem = |value: &str| -> ConfigResult<ProblemKind> {
        parse_value("problem", value, "plane_source, su_olson or beam_2d")
    };
    let mut problem = ProblemKind::PlaneSource;
    if let Some(e) = doc.global.iter().find(|e| e.key == "problem") {
        problem = lookup_problem(&e.value)?;
    }
    for (k, v) in overrides {
        if k == "problem" {
            problem = lookup_problem(v)?;
        }
    }
    let mut config = RunConfig::defaults(problem);
    let section = doc
        .sections
        .iter()
        .find(|(k, _)| *k == problem)
        .map(|(_, e)| e.as_slice())
        .unwrap_or(&[]);
    for e in doc.global.iter().chain(section).filter(|e| e.key != "problem") {
        config.set(&e.key, &e.value).map_err(|err| match err {
            ConfigError::InvalidValue { .. } | ConfigError::Constraint { .. } => ConfigError::Syntax {
                line: e.line,
                message: err.to_string(),
            },
            other => other,
        })?;
    }
    for (k, v) in overrides.iter().filter(|(k, _)| k != "problem") {
        config.set(k, v)?;
    }
    config.validate()?;
    Ok(config)
}

pub fn parse_config(text: &str) -> ConfigResult<RunConfig> {
    parse_config_with(text, &[])
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path, overrides: &[(String, String)]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_config_with(&text, overrides)?)
}
