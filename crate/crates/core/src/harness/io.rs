//! CSV and JSON persistence plus run manifests.
//!
//! CSV files are UTF-8 with LF line endings and a header row. Floats carry 12
//! significant digits, so a written file parses back into records equal to the
//! originals after [`round_sig`].

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::experiments::{BoundsRow, ConditioningRow, PhaseRow, TrialRecord};
use crate::error::{Error, Result};

/// Significant digits of every float written to CSV.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` rounded to [`SIGNIFICANT_DIGITS`] significant decimal digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// Shortest decimal text of `round_sig(x)`.
pub fn format_float(x: f64) -> String {
    format!("{:?}", round_sig(x))
}

fn format_opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

/// A record with a fixed CSV layout.
pub trait CsvRow: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

impl CsvRow for PhaseRow {
    const HEADER: &'static [&'static str] = &[
        "n", "window", "S", "trials", "successes", "rate", "wilson_lo", "wilson_hi", "seed",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.window.to_string(),
            self.s.to_string(),
            self.trials.to_string(),
            self.successes.to_string(),
            format_float(self.rate),
            format_float(self.wilson_lo),
            format_float(self.wilson_hi),
            self.seed.to_string(),
        ]
    }
}

impl CsvRow for TrialRecord {
    const HEADER: &'static [&'static str] = &[
        "trial_index",
        "seed_used",
        "S",
        "success",
        "relative_error",
        "residual",
        "iterations",
        "certificate_max",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.trial_index.to_string(),
            self.seed_used.to_string(),
            self.s.to_string(),
            self.success.to_string(),
            format_float(self.relative_error),
            format_float(self.residual),
            self.iterations.to_string(),
            format_opt(self.certificate_max, format_float),
        ]
    }
}

impl CsvRow for ConditioningRow {
    const HEADER: &'static [&'static str] = &[
        "n",
        "S",
        "delta",
        "trials",
        "failures",
        "rate",
        "wilson_lo",
        "wilson_hi",
        "bound",
        "markov_bound",
        "seed",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.s.to_string(),
            format_float(self.delta),
            self.trials.to_string(),
            self.failures.to_string(),
            format_float(self.rate),
            format_float(self.wilson_lo),
            format_float(self.wilson_hi),
            format_float(self.bound),
            format_float(self.markov_bound),
            self.seed.to_string(),
        ]
    }
}

impl CsvRow for BoundsRow {
    const HEADER: &'static [&'static str] = &[
        "n",
        "S",
        "sparsity_threshold",
        "coherence_guarantee",
        "conditioning_bound",
        "conditioning_feasible",
        "random_phase_bound",
        "random_phase_feasible",
        "deterministic_bound",
        "deterministic_feasible",
        "C1",
        "C2",
        "C3",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.s.to_string(),
            format_opt(self.sparsity_threshold, format_float),
            self.coherence_guarantee.to_string(),
            format_float(self.conditioning_bound),
            self.conditioning_feasible.to_string(),
            format_opt(self.random_phase_bound, format_float),
            format_opt(self.random_phase_feasible, |b| b.to_string()),
            format_float(self.deterministic_bound),
            self.deterministic_feasible.to_string(),
            format_float(self.c1),
            format_float(self.c2),
            format_float(self.c3),
        ]
    }
}

fn csv_error(path: &Path, source: csv::Error) -> Error {
    if source.is_io_error() {
        match source.into_kind() {
            csv::ErrorKind::Io(e) => Error::io(path, e),
            _ => unreachable!("checked to be an I/O error"),
        }
    } else {
        Error::Csv {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Writes `rows` as CSV to any sink; `label` names the sink in errors.
pub fn write_csv_to<W: Write, R: CsvRow>(sink: W, rows: &[R], label: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(R::HEADER).map_err(|e| csv_error(label, e))?;
    for row in rows {
        w.write_record(row.fields()).map_err(|e| csv_error(label, e))?;
    }
    w.flush().map_err(|e| Error::io(label, e))
}

pub fn write_csv<R: CsvRow>(path: &Path, rows: &[R]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(BufWriter::new(file), rows, path)
}

pub fn read_csv<R: CsvRow>(path: &Path) -> Result<Vec<R>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(R::HEADER.iter().copied()) {
        return Err(Error::InvalidInput(format!(
            "{}: unexpected CSV header {:?}",
            path.display(),
            header.iter().collect::<Vec<_>>()
        )));
    }
    reader
        .deserialize()
        .map(|r| r.map_err(|e| csv_error(path, e)))
        .collect()
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(std::io::BufReader::new(file)).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Record of one CLI run, stored next to its output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub version: String,
    /// Start time in seconds since the Unix epoch.
    pub started_at: f64,
    pub duration_s: f64,
}

/// `<output>.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn write_manifest(output: &Path, manifest: &Manifest) -> Result<PathBuf> {
    let path = manifest_path(output);
    write_json(&path, manifest)?;
    Ok(path)
}
