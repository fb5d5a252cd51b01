//! Randomized comparison of the closed-form scalar solvers against the
//! exhaustive breakpoint oracle.

use std::fmt;

use l1mf_core::scalar::MedianScratch;
use l1mf_core::{l1_line_objective, oracle_breakpoint_min, solve_masked, ScalarWorkspace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Absolute objective gap tolerated between solver and oracle.
pub const OBJECTIVE_SLACK: f64 = 1e-12;
/// Probability that a weight is forced to exactly zero.
pub const ZERO_WEIGHT_PROB: f64 = 0.2;
/// Probability that a mask bit is set in the masked variant.
pub const OBSERVED_PROB: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleParams {
    pub trials: usize,
    pub dim_max: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSummary {
    pub trials: usize,
    /// Instances compared against the oracle (general and masked).
    pub checked: usize,
    /// Instances with no usable weight, where the solver must report
    /// degeneracy instead.
    pub degenerate: usize,
    /// Weighted-median evaluations whose gamma sequence was inspected.
    pub positive_calls: usize,
    pub failures: usize,
    pub gamma_violations: usize,
    pub max_gap: f64,
}

impl OracleSummary {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.gamma_violations == 0
    }
}

impl fmt::Display for OracleSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "oracle-check: trials={} checked={} degenerate={} positive_calls={} failures={} gamma_violations={} max_gap={:e}",
            self.trials, self.checked, self.degenerate, self.positive_calls, self.failures, self.gamma_violations, self.max_gap
        )
    }
}

/// True when `gamma` starts negative, ends positive, never decreases, and
/// the pivot is its first non-negative entry.
pub fn gamma_is_well_formed(s: &MedianScratch) -> bool {
    let g = s.gamma();
    let p = s.pivot();
    g.len() >= 2
        && g[0] < 0.0
        && g[g.len() - 1] > 0.0
        && g.windows(2).all(|w| w[0] <= w[1])
        && (1..g.len()).contains(&p)
        && g[p] >= 0.0
        && g[..p].iter().all(|&a| a < 0.0)
}

struct Checker {
    ws: ScalarWorkspace,
    summary: OracleSummary,
}

impl Checker {
    fn check(&mut self, e: &[f64], u: &[f64]) -> Result<()> {
        let sol = self.ws.solve_pairs(e.iter().copied().zip(u.iter().copied()));
        if u.iter().all(|&x| x == 0.0) {
            self.summary.degenerate += 1;
            if !sol.degenerate {
                self.summary.failures += 1;
            }
            return Ok(());
        }
        self.summary.checked += 1;
        self.summary.positive_calls += 1;
        if !gamma_is_well_formed(self.ws.scratch()) {
            self.summary.gamma_violations += 1;
        }
        let f = l1_line_objective(e, u, sol.value)?;
        let (_, best) = oracle_breakpoint_min(e, u)?;
        let gap = (f - best).abs();
        self.summary.max_gap = self.summary.max_gap.max(gap);
        if sol.degenerate || gap.is_nan() || gap > OBJECTIVE_SLACK {
            self.summary.failures += 1;
        }
        Ok(())
    }
}

pub fn run(params: OracleParams) -> Result<OracleSummary> {
    if params.trials < 1 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    if params.dim_max < 1 {
        return Err(Error::invalid("dim-max must be at least 1"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(params.seed);
    let mut checker = Checker {
        ws: ScalarWorkspace::new(),
        summary: OracleSummary {
            trials: params.trials,
            checked: 0,
            degenerate: 0,
            positive_calls: 0,
            failures: 0,
            gamma_violations: 0,
            max_gap: 0.0,
        },
    };
    let (mut e, mut u, mut w) = (Vec::new(), Vec::new(), Vec::new());
    let (mut we, mut wu) = (Vec::new(), Vec::new());
    for _ in 0..params.trials {
        let d = rng.random_range(1..=params.dim_max);
        e.clear();
        u.clear();
        w.clear();
        for _ in 0..d {
            e.push(rng.sample::<f64, _>(StandardNormal));
            let x: f64 = rng.sample(StandardNormal);
            u.push(if rng.random_bool(ZERO_WEIGHT_PROB) { 0.0 } else { x });
            w.push(u8::from(rng.random_bool(OBSERVED_PROB)));
        }
        checker.check(&e, &u)?;

        we.clear();
        wu.clear();
        we.extend(w.iter().zip(&e).map(|(&b, &x)| f64::from(b) * x));
        wu.extend(w.iter().zip(&u).map(|(&b, &x)| f64::from(b) * x));
        checker.check(&we, &wu)?;
        // The public masked entry point must agree with the explicit product.
        let masked = solve_masked(&w, &e, &u)?;
        let direct = checker.ws.solve_pairs(we.iter().copied().zip(wu.iter().copied()));
        if masked.value.to_bits() != direct.value.to_bits() || masked.degenerate != direct.degenerate {
            checker.summary.failures += 1;
        }
    }
    Ok(checker.summary)
}
