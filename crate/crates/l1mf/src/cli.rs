//! The `l1mf` command line.
//!
//! Exit status: 0 on success, 1 when `oracle-check` finds a mismatch, 2 for
//! usage or validation errors, 3 when `factorize` stops at `--max-sweeps`
//! without meeting `--tol` (factors are still written), 4 for I/O errors.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use l1mf_core::synth::{self, Preset};
use l1mf_core::{factorize_l1_observed, FactorPair, RunDiagnostics, SolverConfig};
use serde::Serialize;

use crate::bench::{parse_algos, run_bench, threads_from_env, Algo, BenchPlan};
use crate::error::{Error, Result};
use crate::io::{read_matrix, read_matrix_with_mask, write_mask, write_matrix, write_trace};
use crate::oracle_check::{self, OracleParams};
use crate::report::{write_report, ReportFormat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ORACLE_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "l1mf", version, about = "L1-norm low-rank matrix factorization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic instance from a preset.
    Synth {
        #[arg(long, value_parser = parse_preset)]
        preset: Preset,
        /// Multiplier applied to the preset's dimensions.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Write into a non-empty directory.
        #[arg(long)]
        force: bool,
    },
    /// Factorize a CSV matrix.
    Factorize {
        #[arg(long)]
        input: PathBuf,
        /// 0/1 mask, combined with any `nan` cells of the input.
        #[arg(long)]
        mask: Option<PathBuf>,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value = "l1", value_parser = parse_algo)]
        algo: Algo,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long = "max-sweeps", default_value_t = 100)]
        max_sweeps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "out-u")]
        out_u: PathBuf,
        #[arg(long = "out-v")]
        out_v: PathBuf,
        /// Per-sweep objective trace (CSV).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Print the objective after every sweep to standard error.
        #[arg(long)]
        verbose: bool,
    },
    /// Run seeded trials of a preset and write a report.
    Bench {
        #[arg(long, value_parser = parse_preset)]
        preset: Preset,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated list of `l1`, `l2`.
        #[arg(long, default_value = "l1")]
        algos: String,
        /// Report path; a `.csv` extension selects the CSV layout, anything
        /// else JSON.
        #[arg(long)]
        report: PathBuf,
    },
    /// Compare the scalar solvers against the brute-force oracle.
    OracleCheck {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long = "dim-max", default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
        dim_max: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_preset(s: &str) -> std::result::Result<Preset, String> {
    s.parse().map_err(|e: l1mf_core::Error| e.to_string())
}

fn parse_algo(s: &str) -> std::result::Result<Algo, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Synth { preset, scale, seed, out, force } => cmd_synth(preset, scale, seed, &out, force),
        Command::Factorize { input, mask, rank, algo, tol, max_sweeps, seed, out_u, out_v, trace, verbose } => {
            let cfg = SolverConfig::new(rank).with_tol(tol).with_max_sweeps(max_sweeps).with_seed(seed);
            cmd_factorize(&input, mask.as_deref(), algo, &cfg, &out_u, &out_v, trace.as_deref(), verbose)
        }
        Command::Bench { preset, scale, trials, seed, algos, report } => {
            cmd_bench(preset, scale, trials as usize, seed, &algos, &report)
        }
        Command::OracleCheck { trials, dim_max, seed } => {
            let summary = oracle_check::run(OracleParams { trials: trials as usize, dim_max: dim_max as usize, seed })?;
            println!("{summary}");
            Ok(if summary.passed() { EXIT_OK } else { EXIT_ORACLE_MISMATCH })
        }
    }
}

#[derive(Serialize)]
struct InstanceEcho<'a> {
    schema_version: u32,
    preset: &'a str,
    scale: f64,
    seed: u64,
    d: usize,
    n: usize,
    rank: usize,
    outlier_fraction: f64,
    outlier_range: f64,
    outlier_mode: &'a str,
    missing_fraction: f64,
    outlier_count: usize,
    missing_count: usize,
    outlier_positions: &'a [(usize, usize)],
}

fn cmd_synth(preset: Preset, scale: f64, seed: u64, out: &Path, force: bool) -> Result<i32> {
    let spec = synth::preset(preset, scale, seed)?;
    if !force && out.is_dir() {
        let mut entries = std::fs::read_dir(out).map_err(|e| Error::io(out, e))?;
        if entries.next().is_some() {
            return Err(Error::invalid(format!(
                "output directory {} is not empty (pass --force to overwrite)",
                out.display()
            )));
        }
    }
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let (inst, _) = synth::generate(&spec)?;
    write_matrix(&inst.x_true, None, out.join("X_true.csv"))?;
    let mask = inst.has_missing().then_some(&inst.mask);
    write_matrix(&inst.x_corrupt, mask, out.join("X_corrupt.csv"))?;
    if let Some(w) = mask {
        write_mask(w, out.join("mask.csv"))?;
    }
    let echo = InstanceEcho {
        schema_version: 1,
        preset: preset.name(),
        scale,
        seed,
        d: spec.d,
        n: spec.n,
        rank: spec.rank,
        outlier_fraction: spec.outlier_fraction,
        outlier_range: spec.outlier_range,
        outlier_mode: spec.outlier_mode.name(),
        missing_fraction: spec.missing_fraction,
        outlier_count: inst.outlier_positions.len(),
        missing_count: inst.mask.as_slice().iter().filter(|&&b| b == 0).count(),
        outlier_positions: &inst.outlier_positions,
    };
    let mut json = serde_json::to_string_pretty(&echo).map_err(|e| Error::invalid(e.to_string()))?;
    json.push('\n');
    crate::io::write_file(&out.join("instance.json"), json.as_bytes())?;
    println!("wrote {}x{} {} instance to {}", spec.d, spec.n, preset, out.display());
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_factorize(
    input: &Path,
    mask: Option<&Path>,
    algo: Algo,
    cfg: &SolverConfig,
    out_u: &Path,
    out_v: &Path,
    trace: Option<&Path>,
    verbose: bool,
) -> Result<i32> {
    let (x, w) = match mask {
        Some(m) => read_matrix_with_mask(input, m)?,
        None => read_matrix(input)?,
    };
    cfg.check(x.rows(), x.cols())?;
    let w = (!w.is_all_ones()).then_some(w);

    let log_sweep = |sweep: usize, objective: f64| {
        let _ = writeln!(std::io::stderr(), "sweep {sweep}: objective {objective:e}");
    };
    let (f, diag): (FactorPair, RunDiagnostics) = match algo {
        Algo::L1 => factorize_l1_observed(&x, w.as_ref(), cfg, |s, obj| {
            if verbose {
                log_sweep(s, obj)
            }
        })?,
        Algo::L2 => {
            let out = match &w {
                Some(w) => l1mf_core::factorize_l2_als_masked(&x, w, cfg)?,
                None => l1mf_core::factorize_l2_als(&x, cfg)?,
            };
            if verbose {
                for (s, &obj) in out.1.objective_trace.iter().enumerate() {
                    log_sweep(s + 1, obj);
                }
            }
            out
        }
    };

    write_matrix(f.u(), None, out_u)?;
    write_matrix(f.v(), None, out_v)?;
    if let Some(t) = trace {
        write_trace(&diag.objective_trace, t)?;
    }
    println!(
        "algo={} rank={} masked={} final_objective={:e} sweeps={} converged={} wall_time={:.3}s",
        algo,
        cfg.rank,
        w.is_some(),
        diag.final_objective().unwrap_or(f64::NAN),
        diag.sweeps_run,
        diag.converged,
        diag.wall_time
    );
    Ok(if diag.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn cmd_bench(preset: Preset, scale: f64, trials: usize, seed: u64, algos: &str, report: &Path) -> Result<i32> {
    let plan = BenchPlan::preset(preset, scale, trials, seed, parse_algos(algos)?)?;
    let threads = threads_from_env()?;
    let format = match report.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => ReportFormat::Csv,
        _ => ReportFormat::Json,
    };
    let result = run_bench(&plan, threads)?;
    write_report(&result, report, format)?;
    print!("{}", result.table());
    Ok(EXIT_OK)
}
