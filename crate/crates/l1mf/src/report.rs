//! Benchmark reports.
//!
//! The JSON layout (schema version 1):
//!
//! ```text
//! {
//!   "schema_version": 1,
//!   "tool_version": "0.1.0",
//!   "scenario": { "name", "scale", "d", "n", "rank", "outlier_fraction",
//!                 "outlier_range", "outlier_mode", "missing_fraction" },
//!   "trials": T,
//!   "seed": N,
//!   "config": { "tol", "max_sweeps", "init" },
//!   "algorithms": [
//!     { "algo": "l1" | "l2",
//!       "records": [ { "trial", "seed", "rel_error", "masked_rel_error",
//!                      "final_objective", "sweeps", "converged",
//!                      "wall_time" } ],
//!       "aggregates": { "rel_error": {mean, median, min, max}, ... } }
//!   ]
//! }
//! ```
//!
//! `masked_rel_error` is `null` (and absent from the aggregates) for
//! scenarios without missing entries. `wall_time` is in seconds and is the
//! only field that varies between identical runs.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_file;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub scenario: ScenarioEcho,
    pub trials: usize,
    pub seed: u64,
    pub config: ConfigEcho,
    pub algorithms: Vec<AlgoReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEcho {
    pub name: String,
    pub scale: f64,
    pub d: usize,
    pub n: usize,
    pub rank: usize,
    pub outlier_fraction: f64,
    pub outlier_range: f64,
    pub outlier_mode: String,
    pub missing_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub tol: f64,
    pub max_sweeps: usize,
    pub init: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoReport {
    pub algo: String,
    pub records: Vec<TrialRecord>,
    pub aggregates: Aggregates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub rel_error: f64,
    pub masked_rel_error: Option<f64>,
    pub final_objective: f64,
    pub sweeps: usize,
    pub converged: bool,
    pub wall_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    /// Summary of a non-empty sample. The median of an even-sized sample
    /// is the mean of the two middle values.
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let m = sorted.len();
        let median = if m % 2 == 1 { sorted[m / 2] } else { 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]) };
        Some(Stats { mean: values.iter().sum::<f64>() / m as f64, median, min: sorted[0], max: sorted[m - 1] })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub rel_error: Stats,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub masked_rel_error: Option<Stats>,
    pub final_objective: Stats,
    pub sweeps: Stats,
    pub wall_time: Stats,
}

impl Aggregates {
    /// Recomputes every aggregate from `records`, which must be non-empty.
    pub fn from_records(records: &[TrialRecord]) -> Result<Aggregates> {
        let field = |f: fn(&TrialRecord) -> f64| {
            Stats::of(&records.iter().map(f).collect::<Vec<_>>()).ok_or_else(|| Error::invalid("no trial records"))
        };
        let masked: Vec<f64> = records.iter().filter_map(|r| r.masked_rel_error).collect();
        Ok(Aggregates {
            rel_error: field(|r| r.rel_error)?,
            masked_rel_error: Stats::of(&masked),
            final_objective: field(|r| r.final_objective)?,
            sweeps: field(|r| r.sweeps as f64)?,
            wall_time: field(|r| r.wall_time)?,
        })
    }
}

impl AlgoReport {
    pub fn new(algo: impl Into<String>, records: Vec<TrialRecord>) -> Result<AlgoReport> {
        let aggregates = Aggregates::from_records(&records)?;
        Ok(AlgoReport { algo: algo.into(), records, aggregates })
    }
}

impl BenchReport {
    pub fn algo(&self, name: &str) -> Option<&AlgoReport> {
        self.algorithms.iter().find(|a| a.algo == name)
    }

    /// Plain-text aggregate table, one row per algorithm.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{} (scale {}, {}x{}, rank {}) trials={} seed={}\n",
            self.scenario.name,
            self.scenario.scale,
            self.scenario.d,
            self.scenario.n,
            self.scenario.rank,
            self.trials,
            self.seed
        );
        out.push_str(&format!(
            "{:<5} {:>12} {:>12} {:>12} {:>12} {:>8} {:>10}\n",
            "algo", "mean", "median", "min", "max", "sweeps", "time(s)"
        ));
        for a in &self.algorithms {
            let s = &a.aggregates.rel_error;
            out.push_str(&format!(
                "{:<5} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>8.1} {:>10.3}\n",
                a.algo, s.mean, s.median, s.min, s.max, a.aggregates.sweeps.mean, a.aggregates.wall_time.mean
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(Error::invalid(format!("unknown report format '{s}' (expected json or csv)"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        })
    }
}

/// JSON is pretty-printed with a trailing newline. CSV is one row per
/// (algorithm, trial) under a header row; a missing `masked_rel_error` is
/// left empty.
pub fn render_report(report: &BenchReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).map_err(|e| Error::invalid(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Csv => {
            let mut out =
                String::from("algo,trial,seed,rel_error,masked_rel_error,final_objective,sweeps,converged,wall_time\n");
            for a in &report.algorithms {
                for r in &a.records {
                    let masked = r.masked_rel_error.map(|m| format!("{m:?}")).unwrap_or_default();
                    out.push_str(&format!(
                        "{},{},{},{:?},{},{:?},{},{},{:?}\n",
                        a.algo,
                        r.trial,
                        r.seed,
                        r.rel_error,
                        masked,
                        r.final_objective,
                        r.sweeps,
                        r.converged,
                        r.wall_time
                    ));
                }
            }
            Ok(out)
        }
    }
}

pub fn write_report(report: &BenchReport, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    write_file(path.as_ref(), render_report(report, format)?.as_bytes())
}

pub fn read_report(path: impl AsRef<Path>) -> Result<BenchReport> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), source })
}
