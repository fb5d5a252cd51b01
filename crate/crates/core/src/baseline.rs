//! L2 comparison methods: alternating least squares for `min ‖X − U·Vᵀ‖_F`
//! and its observation-weighted form `min ‖W ⊙ (X − U·Vᵀ)‖_F`.
//!
//! These stand in for the SVD (full data) and weighted low-rank approximation
//! (missing data) baselines. On the full-data problem ALS reaches the same
//! optimal value as a truncated SVD, which is all the comparison needs.
//!
//! Each half-step solves one `k × k` normal-equation system per row of `V`
//! (then of `U`) by Cholesky. Systems that are not numerically positive
//! definite, or that have fewer than `k` observed entries, are retried with a
//! ridge of `1e-12 · trace`; these are counted in
//! [`RunDiagnostics::ridge_solves`].

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::factorize::{frob_delta, gaussian_init, split_columns, RunDiagnostics, SolverConfig, Stopwatch};
use crate::matrix::{DenseMatrix, FactorPair, MaskMatrix};
use crate::metrics::{squared_frob_error, squared_frob_error_masked};

const RIDGE: f64 = 1e-12;

/// Alternating least squares on the full matrix ("SVD-equivalent baseline").
pub fn factorize_l2_als(x: &DenseMatrix, cfg: &SolverConfig) -> Result<(FactorPair, RunDiagnostics)> {
    run(x, None, cfg)
}

/// Alternating least squares using only observed entries.
pub fn factorize_l2_als_masked(
    x: &DenseMatrix,
    w: &MaskMatrix,
    cfg: &SolverConfig,
) -> Result<(FactorPair, RunDiagnostics)> {
    w.check_pairs_with(x)?;
    run(x, Some(w), cfg)
}

/// Which side of `X ≈ U·Vᵀ` is being solved for.
#[derive(Clone, Copy)]
enum Side {
    /// Rows of `V`: one system per column of `X`.
    V,
    /// Rows of `U`: one system per row of `X`.
    U,
}

struct HalfStep<'a> {
    x: &'a DenseMatrix,
    w: Option<&'a MaskMatrix>,
    k: usize,
    gram: Vec<f64>,
    rhs: Vec<f64>,
    chol: Vec<f64>,
    ridge_solves: u64,
    degenerate: u64,
}

impl<'a> HalfStep<'a> {
    fn new(x: &'a DenseMatrix, w: Option<&'a MaskMatrix>, k: usize) -> Self {
        Self {
            x,
            w,
            k,
            gram: vec![0.0; k * k],
            rhs: vec![0.0; k],
            chol: vec![0.0; k * k],
            ridge_solves: 0,
            degenerate: 0,
        }
    }

    /// Re-solves every row of `target` (`m × k`, row-major) against the fixed
    /// `other` (`p × k`).
    fn solve(&mut self, side: Side, other: &[f64], target: &mut [f64]) {
        let k = self.k;
        let (m, p) = match side {
            Side::V => (self.x.cols(), self.x.rows()),
            Side::U => (self.x.rows(), self.x.cols()),
        };
        let x = self.x;
        let entry = |t: usize, s: usize| match side {
            Side::V => (x.get(s, t), s, t),
            Side::U => (x.get(t, s), t, s),
        };

        let shared_gram = self.w.is_none();
        if shared_gram {
            accumulate_gram(&mut self.gram, other, k, (0..p).map(|_| true));
        }
        for t in 0..m {
            let w = self.w;
            let observed = |s: usize| {
                let (_, r, c) = entry(t, s);
                w.is_none_or(|w| w.is_observed(r, c))
            };
            if !shared_gram {
                accumulate_gram(&mut self.gram, other, k, (0..p).map(observed));
            }
            self.rhs.iter_mut().for_each(|b| *b = 0.0);
            let mut count = 0;
            for s in 0..p {
                if !observed(s) {
                    continue;
                }
                count += 1;
                let (value, _, _) = entry(t, s);
                for (b, &o) in self.rhs.iter_mut().zip(&other[s * k..(s + 1) * k]) {
                    *b += value * o;
                }
            }
            let row = &mut target[t * k..(t + 1) * k];
            self.solve_row(count, row);
        }
    }

    fn solve_row(&mut self, observed: usize, row: &mut [f64]) {
        let k = self.k;
        let trace: f64 = (0..k).map(|i| self.gram[i * k + i]).sum();
        if trace.is_nan() || trace <= 0.0 {
            self.degenerate += 1;
            return;
        }
        let plain = observed >= k && cholesky(&self.gram, k, 0.0, trace, &mut self.chol);
        if !plain {
            self.ridge_solves += 1;
            if !cholesky(&self.gram, k, RIDGE * trace, trace, &mut self.chol) {
                self.degenerate += 1;
                return;
            }
        }
        row.copy_from_slice(&self.rhs);
        cholesky_solve(&self.chol, k, row);
    }
}

fn accumulate_gram(gram: &mut [f64], other: &[f64], k: usize, include: impl Iterator<Item = bool>) {
    gram.iter_mut().for_each(|g| *g = 0.0);
    for (s, keep) in include.enumerate() {
        if !keep {
            continue;
        }
        let o = &other[s * k..(s + 1) * k];
        for a in 0..k {
            for b in 0..=a {
                gram[a * k + b] += o[a] * o[b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            gram[b * k + a] = gram[a * k + b];
        }
    }
}

/// Lower-triangular Cholesky factor of `gram + ridge·I`. Fails when a pivot
/// is not above `eps · trace`.
fn cholesky(gram: &[f64], k: usize, ridge: f64, trace: f64, l: &mut [f64]) -> bool {
    l.iter_mut().for_each(|x| *x = 0.0);
    let floor = f64::EPSILON * trace;
    for i in 0..k {
        for j in 0..=i {
            let mut s = gram[i * k + j];
            if i == j {
                s += ridge;
            }
            for p in 0..j {
                s -= l[i * k + p] * l[j * k + p];
            }
            if i == j {
                if s.is_nan() || s <= floor {
                    return false;
                }
                l[i * k + i] = libm::sqrt(s);
            } else {
                l[i * k + j] = s / l[j * k + j];
            }
        }
    }
    true
}

fn cholesky_solve(l: &[f64], k: usize, b: &mut [f64]) {
    for i in 0..k {
        let mut s = b[i];
        for p in 0..i {
            s -= l[i * k + p] * b[p];
        }
        b[i] = s / l[i * k + i];
    }
    for i in (0..k).rev() {
        let mut s = b[i];
        for p in i + 1..k {
            s -= l[p * k + i] * b[p];
        }
        b[i] = s / l[i * k + i];
    }
}

fn run(x: &DenseMatrix, w: Option<&MaskMatrix>, cfg: &SolverConfig) -> Result<(FactorPair, RunDiagnostics)> {
    let clock = Stopwatch::start();
    let (d, n) = x.shape();
    cfg.check(d, n)?;
    let k = cfg.rank;
    let (mut u, mut v) = gaussian_init(d, n, cfg);
    let mut step = HalfStep::new(x, w, k);
    let mut diag = RunDiagnostics::default();

    let objective = |u: &[f64], v: &[f64]| -> Result<f64> {
        let f = FactorPair::new(DenseMatrix::from_vec(d, k, u.to_vec())?, DenseMatrix::from_vec(n, k, v.to_vec())?)?;
        match w {
            None => squared_frob_error(x, &f),
            Some(w) => squared_frob_error_masked(x, w, &f),
        }
    };

    if cfg.validate {
        diag.step_objectives.push(objective(&u, &v)?);
    }

    for sweep in 1..=cfg.max_sweeps {
        let u_prev = u.clone();
        step.solve(Side::V, &u, &mut v);
        if cfg.validate {
            diag.step_objectives.push(objective(&u, &v)?);
        }
        step.solve(Side::U, &v, &mut u);
        let obj = objective(&u, &v)?;
        if cfg.validate {
            diag.step_objectives.push(obj);
        }
        diag.objective_trace.push(obj);
        diag.sweeps_run = sweep;

        let (delta, norm) = frob_delta(&split_columns(&u, d, k), &split_columns(&u_prev, d, k));
        if delta <= cfg.tol * norm.max(1.0) {
            diag.converged = true;
            break;
        }
    }

    diag.ridge_solves = step.ridge_solves;
    diag.degenerate_updates = step.degenerate;
    let us = split_columns(&u, d, k);
    diag.zero_components = us.iter().filter(|c| c.iter().all(|&x| x == 0.0)).count();
    diag.wall_time = clock.seconds();
    let f = FactorPair::new(DenseMatrix::from_vec(d, k, u)?, DenseMatrix::from_vec(n, k, v)?)?;
    Ok((f, diag))
}
