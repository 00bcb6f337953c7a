//! CSV snapshots and histories.
//!
//! Every file has a header row, `'\n'` line endings and values written with
//! 17 significant digits (`{:.16e}`), so that reading a file back reproduces
//! the written `f64` values exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::diagnostics::{History, HistoryRow};
use crate::error::{Error, Result};

pub const SNAPSHOT_1D_HEADER: [&str; 4] = ["x", "phi", "T", "B"];
pub const SNAPSHOT_2D_HEADER: [&str; 4] = ["x1", "x2", "phi", "T"];
pub const HISTORY_HEADER: [&str; 6] = ["t", "rank", "mass", "energy", "rel_mass_err", "wall_s"];

/// Cell-wise 1D output.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Snapshot1d {
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
    pub temperature: Vec<f64>,
    pub b: Vec<f64>,
}

/// Cell-wise 2D output in long format, first coordinate fastest.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Snapshot2d {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub phi: Vec<f64>,
    pub temperature: Vec<f64>,
}

fn push_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v:.16e}");
    }
    out.push('\n');
}

fn header(out: &mut String, names: &[&str]) {
    out.push_str(&names.join(","));
    out.push('\n');
}

fn check_lengths(lens: &[usize]) -> Result<()> {
    if lens.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::InvalidArgument(format!(
            "snapshot columns have different lengths {lens:?}"
        )));
    }
    Ok(())
}

impl Snapshot1d {
    pub fn to_csv(&self) -> Result<String> {
        check_lengths(&[self.x.len(), self.phi.len(), self.temperature.len(), self.b.len()])?;
        let mut out = String::new();
        header(&mut out, &SNAPSHOT_1D_HEADER);
        for j in 0..self.x.len() {
            push_row(&mut out, &[self.x[j], self.phi[j], self.temperature[j], self.b[j]]);
        }
        Ok(out)
    }

    pub fn from_csv(text: &str, origin: &Path) -> Result<Self> {
        let cols = read_columns(text, &SNAPSHOT_1D_HEADER, origin)?;
        let mut it = cols.into_iter();
        let mut next = || it.next().unwrap_or_default();
        Ok(Snapshot1d {
            x: next(),
            phi: next(),
            temperature: next(),
            b: next(),
        })
    }
}

impl Snapshot2d {
    pub fn to_csv(&self) -> Result<String> {
        check_lengths(&[self.x1.len(), self.x2.len(), self.phi.len(), self.temperature.len()])?;
        let mut out = String::new();
        header(&mut out, &SNAPSHOT_2D_HEADER);
        for j in 0..self.x1.len() {
            push_row(&mut out, &[self.x1[j], self.x2[j], self.phi[j], self.temperature[j]]);
        }
        Ok(out)
    }

    pub fn from_csv(text: &str, origin: &Path) -> Result<Self> {
        let cols = read_columns(text, &SNAPSHOT_2D_HEADER, origin)?;
        let mut it = cols.into_iter();
        let mut next = || it.next().unwrap_or_default();
        Ok(Snapshot2d {
            x1: next(),
            x2: next(),
            phi: next(),
            temperature: next(),
        })
    }
}

pub fn history_to_csv(history: &History) -> String {
    let mut out = String::new();
    header(&mut out, &HISTORY_HEADER);
    for r in &history.rows {
        let _ = writeln!(
            out,
            "{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.t, r.rank, r.mass, r.energy, r.rel_mass_err, r.wall_s
        );
    }
    out
}

pub fn history_from_csv(text: &str, origin: &Path) -> Result<History> {
    let mut reader = csv_reader(text);
    check_header(&mut reader, &HISTORY_HEADER, origin)?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| parse_error(origin, line, e.to_string()))?;
        if record.len() != HISTORY_HEADER.len() {
            return Err(parse_error(
                origin,
                line,
                format!("expected {} fields, got {}", HISTORY_HEADER.len(), record.len()),
            ));
        }
        let float = |k: usize| parse_field(&record[k], HISTORY_HEADER[k], origin, line);
        let rank = record[1]
            .trim()
            .parse::<usize>()
            .map_err(|_| parse_error(origin, line, format!("rank `{}` is not a count", &record[1])))?;
        rows.push(HistoryRow {
            t: float(0)?,
            rank,
            mass: float(2)?,
            energy: float(3)?,
            rel_mass_err: float(4)?,
            wall_s: float(5)?,
        });
    }
    Ok(History { rows })
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes())
}

fn parse_error(origin: &Path, line: usize, message: String) -> Error {
    Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    }
}

fn check_header(reader: &mut csv::Reader<&[u8]>, expected: &[&str], origin: &Path) -> Result<()> {
    let found = reader
        .headers()
        .map_err(|e| parse_error(origin, 1, e.to_string()))?;
    if found.iter().ne(expected.iter().copied()) {
        return Err(parse_error(
            origin,
            1,
            format!("expected header `{}`, got `{}`", expected.join(","), found.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    Ok(())
}

fn parse_field(s: &str, name: &str, origin: &Path, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| parse_error(origin, line, format!("column `{name}`: `{s}` is not a number")))
}

fn read_columns(text: &str, expected: &[&str], origin: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv_reader(text);
    check_header(&mut reader, expected, origin)?;
    let mut cols = vec![Vec::new(); expected.len()];
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| parse_error(origin, line, e.to_string()))?;
        if record.len() != expected.len() {
            return Err(parse_error(
                origin,
                line,
                format!("expected {} fields, got {}", expected.len(), record.len()),
            ));
        }
        for (k, col) in cols.iter_mut().enumerate() {
            col.push(parse_field(&record[k], expected[k], origin, line)?);
        }
    }
    Ok(cols)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_snapshot_1d(path: &Path, snap: &Snapshot1d) -> Result<()> {
    write_file(path, &snap.to_csv()?)
}

pub fn write_snapshot_2d(path: &Path, snap: &Snapshot2d) -> Result<()> {
    write_file(path, &snap.to_csv()?)
}

pub fn write_history(path: &Path, history: &History) -> Result<()> {
    write_file(path, &history_to_csv(history))
}

pub fn read_snapshot_1d(path: &Path) -> Result<Snapshot1d> {
    Snapshot1d::from_csv(&read_file(path)?, path)
}

pub fn read_snapshot_2d(path: &Path) -> Result<Snapshot2d> {
    Snapshot2d::from_csv(&read_file(path)?, path)
}

pub fn read_history(path: &Path) -> Result<History> {
    history_from_csv(&read_file(path)?, path)
}
