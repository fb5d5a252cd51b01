//! Seeded multi-trial benchmarks over the synthetic presets.
//!
//! Trial `t` of a run with seed `s` uses seed `s + t` both for the instance
//! and for the factor initialization, so any single trial can be replayed
//! on its own with `l1mf synth` and `l1mf factorize --seed`.

use std::fmt;
use std::str::FromStr;

use l1mf_core::synth::{self, Preset, ScenarioSpec, SyntheticInstance};
use l1mf_core::{
    factorize_l1, factorize_l1_masked, factorize_l2_als, factorize_l2_als_masked, objective_l1, objective_l1_masked,
    rel_frob_error, rel_frob_error_masked, squared_frob_error, squared_frob_error_masked, FactorPair, RunDiagnostics,
    SolverConfig,
};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::report::{AlgoReport, BenchReport, ConfigEcho, ScenarioEcho, TrialRecord, SCHEMA_VERSION};

/// Environment variable holding the default worker count for `bench`.
pub const THREADS_ENV: &str = "L1MF_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    /// Divide-and-conquer L1 factorization.
    L1,
    /// Alternating least squares.
    L2,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::L1 => "l1",
            Algo::L2 => "l2",
        }
    }

    /// Runs this algorithm on `instance`, masked whenever the instance has
    /// missing entries.
    pub fn run(self, instance: &SyntheticInstance, cfg: &SolverConfig) -> Result<(FactorPair, RunDiagnostics)> {
        let x = &instance.x_corrupt;
        let w = &instance.mask;
        let masked = instance.has_missing();
        Ok(match (self, masked) {
            (Algo::L1, false) => factorize_l1(x, cfg)?,
            (Algo::L1, true) => factorize_l1_masked(x, w, cfg)?,
            (Algo::L2, false) => factorize_l2_als(x, cfg)?,
            (Algo::L2, true) => factorize_l2_als_masked(x, w, cfg)?,
        })
    }

    /// The loss this algorithm minimizes, evaluated on the corrupted data.
    pub fn objective(self, instance: &SyntheticInstance, f: &FactorPair) -> Result<f64> {
        let x = &instance.x_corrupt;
        let w = &instance.mask;
        Ok(match (self, instance.has_missing()) {
            (Algo::L1, false) => objective_l1(x, f)?,
            (Algo::L1, true) => objective_l1_masked(x, w, f)?,
            (Algo::L2, false) => squared_frob_error(x, f)?,
            (Algo::L2, true) => squared_frob_error_masked(x, w, f)?,
        })
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l1" => Ok(Algo::L1),
            "l2" => Ok(Algo::L2),
            _ => Err(Error::invalid(format!("unknown algorithm '{s}' (expected l1 or l2)"))),
        }
    }
}

/// Parses a comma-separated algorithm list such as `l1,l2`. Duplicates are
/// rejected.
pub fn parse_algos(list: &str) -> Result<Vec<Algo>> {
    let mut algos = Vec::new();
    for token in list.split(',') {
        let a: Algo = token.parse()?;
        if algos.contains(&a) {
            return Err(Error::invalid(format!("algorithm '{a}' listed twice")));
        }
        algos.push(a);
    }
    Ok(algos)
}

#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub name: String,
    pub scale: f64,
    /// Scenario template; its seed is replaced per trial.
    pub scenario: ScenarioSpec,
    pub trials: usize,
    pub seed: u64,
    pub algos: Vec<Algo>,
    pub tol: f64,
    pub max_sweeps: usize,
}

impl BenchPlan {
    /// Plan for a named preset with the default solver settings.
    pub fn preset(preset: Preset, scale: f64, trials: usize, seed: u64, algos: Vec<Algo>) -> Result<BenchPlan> {
        let scenario = synth::preset(preset, scale, seed)?;
        let defaults = SolverConfig::new(scenario.rank);
        let plan = BenchPlan {
            name: preset.name().to_string(),
            scale,
            scenario,
            trials,
            seed,
            algos,
            tol: defaults.tol,
            max_sweeps: defaults.max_sweeps,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn with_solver(mut self, tol: f64, max_sweeps: usize) -> Self {
        self.tol = tol;
        self.max_sweeps = max_sweeps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.algos.is_empty() {
            return Err(Error::invalid("no algorithms requested"));
        }
        self.scenario.validate()?;
        self.solver_config(0).check(self.scenario.d, self.scenario.n)?;
        Ok(())
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.seed.wrapping_add(trial as u64)
    }

    pub fn trial_scenario(&self, trial: usize) -> ScenarioSpec {
        ScenarioSpec { seed: self.trial_seed(trial), ..self.scenario.clone() }
    }

    pub fn solver_config(&self, trial: usize) -> SolverConfig {
        SolverConfig::new(self.scenario.rank)
            .with_seed(self.trial_seed(trial))
            .with_tol(self.tol)
            .with_max_sweeps(self.max_sweeps)
    }
}

/// Everything one trial produced, kept for callers that need more than the
/// report fields.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: usize,
    pub instance: SyntheticInstance,
    pub fits: Vec<(Algo, FactorPair, RunDiagnostics)>,
}

impl TrialOutcome {
    pub fn records(&self, seed: u64) -> Result<Vec<TrialRecord>> {
        let inst = &self.instance;
        self.fits
            .iter()
            .map(|(algo, f, diag)| {
                Ok(TrialRecord {
                    trial: self.trial,
                    seed,
                    rel_error: rel_frob_error(&inst.x_true, f)?,
                    masked_rel_error: if inst.has_missing() {
                        Some(rel_frob_error_masked(&inst.x_true, &inst.mask, f)?)
                    } else {
                        None
                    },
                    final_objective: algo.objective(inst, f)?,
                    sweeps: diag.sweeps_run,
                    converged: diag.converged,
                    wall_time: diag.wall_time,
                })
            })
            .collect()
    }
}

/// Generates trial `trial`'s instance and fits every planned algorithm to it.
pub fn run_trial(plan: &BenchPlan, trial: usize) -> Result<TrialOutcome> {
    let (instance, _) = synth::generate(&plan.trial_scenario(trial))?;
    let cfg = plan.solver_config(trial);
    let fits = plan
        .algos
        .iter()
        .map(|&algo| algo.run(&instance, &cfg).map(|(f, d)| (algo, f, d)))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialOutcome { trial, instance, fits })
}

/// Runs `f(trial)` for every trial on `threads` workers (or the default
/// pool size when `None`), returning results in trial order.
pub fn map_trials<T: Send>(
    trials: usize,
    threads: Option<usize>,
    f: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder.build().map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..trials).into_par_iter().map(f).collect())
}

pub fn run_bench(plan: &BenchPlan, threads: Option<usize>) -> Result<BenchReport> {
    plan.validate()?;
    let per_trial = map_trials(plan.trials, threads, |t| run_trial(plan, t)?.records(plan.trial_seed(t)))?;

    let algorithms = plan
        .algos
        .iter()
        .enumerate()
        .map(|(k, algo)| AlgoReport::new(algo.name(), per_trial.iter().map(|recs| recs[k].clone()).collect()))
        .collect::<Result<Vec<_>>>()?;

    let s = &plan.scenario;
    Ok(BenchReport {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        scenario: ScenarioEcho {
            name: plan.name.clone(),
            scale: plan.scale,
            d: s.d,
            n: s.n,
            rank: s.rank,
            outlier_fraction: s.outlier_fraction,
            outlier_range: s.outlier_range,
            outlier_mode: s.outlier_mode.name().to_string(),
            missing_fraction: s.missing_fraction,
        },
        trials: plan.trials,
        seed: plan.seed,
        config: ConfigEcho { tol: plan.tol, max_sweeps: plan.max_sweeps, init: "gaussian".to_string() },
        algorithms,
    })
}

/// Worker count from `L1MF_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::invalid(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
    }
}
