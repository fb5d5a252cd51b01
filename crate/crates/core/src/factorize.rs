//! Alternating rank-one sweeps for `min ‖X − U·Vᵀ‖₁` and its masked variant.
//!
//! One sweep visits components `i = 0..k` in order. For each it forms the
//! residual `E_i = X − Σ_{j≠i} u_j·v_jᵀ`, replaces every `v_i[j]` by the
//! closed-form minimizer against column `j` of `E_i` (weights `u_i`), then
//! every `u_i[r]` against row `r` of `E_i` (weights: the new `v_i`). Each
//! scalar update is an exact minimizer, so the objective never increases.
//!
//! `E_i` is obtained from a maintained residual `R = X − U·Vᵀ` as
//! `R + u_i·v_iᵀ`, which costs O(dn) per component instead of O(kdn). `R` is
//! rebuilt from scratch every [`RESIDUAL_REFRESH`] sweeps to bound drift.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, FactorPair, MaskMatrix};
use crate::metrics::{objective_l1, objective_l1_masked};
use crate::rng::{self, Stream};
use crate::scalar::{masked_pairs, ScalarWorkspace};

/// Sweeps between full recomputations of the maintained residual.
pub const RESIDUAL_REFRESH: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Init {
    /// I.i.d. standard normal entries for `U⁽⁰⁾` then `V⁽⁰⁾` (row-major),
    /// drawn from ChaCha20 stream 0 keyed by the config seed.
    #[default]
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub rank: usize,
    /// Stop when `‖U⁽ᵗ⁾ − U⁽ᵗ⁻¹⁾‖_F ≤ tol · max(1, ‖U⁽ᵗ⁾‖_F)`.
    pub tol: f64,
    pub max_sweeps: usize,
    pub seed: u64,
    pub init: Init,
    /// Record the objective after every component (L1) or half-step (L2).
    /// Roughly doubles the cost of a sweep.
    pub validate: bool,
}

impl SolverConfig {
    pub fn new(rank: usize) -> Self {
        Self { rank, tol: 1e-6, max_sweeps: 100, seed: 0, init: Init::Gaussian, validate: false }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_sweeps(mut self, max_sweeps: usize) -> Self {
        self.max_sweeps = max_sweeps;
        self
    }

    pub fn with_validation(mut self, validate: bool) -> Self {
        self.validate = validate;
        self
    }

    pub fn check(&self, d: usize, n: usize) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::invalid("rank must be at least 1"));
        }
        if self.rank > d.min(n) {
            return Err(Error::RankTooLarge { rank: self.rank, max: d.min(n) });
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::invalid(alloc::format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_sweeps == 0 {
            return Err(Error::invalid("max_sweeps must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunDiagnostics {
    /// Objective after each completed sweep: `‖X − UVᵀ‖₁` (or masked) for the
    /// L1 solvers, the squared Frobenius error for the L2 baselines.
    pub objective_trace: Vec<f64>,
    pub sweeps_run: usize,
    pub converged: bool,
    /// Scalar or row updates skipped because no observed, nonzero weight was left.
    pub degenerate_updates: u64,
    /// Components whose `u_i` ended exactly zero.
    pub zero_components: usize,
    /// L2 baselines: normal-equation solves that needed the ridge term.
    pub ridge_solves: u64,
    /// Validation mode only: objective at the initial factors, then after
    /// every component update (L1) or half-step (L2), in order.
    pub step_objectives: Vec<f64>,
    /// Seconds; 0.0 without the `std` feature.
    pub wall_time: f64,
}

impl RunDiagnostics {
    pub fn final_objective(&self) -> Option<f64> {
        self.objective_trace.last().copied()
    }
}

pub(crate) struct Stopwatch {
    #[cfg(feature = "std")]
    start: std::time::Instant,
}

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Stopwatch {
            #[cfg(feature = "std")]
            start: std::time::Instant::now(),
        }
    }

    pub(crate) fn seconds(&self) -> f64 {
        #[cfg(feature = "std")]
        {
            self.start.elapsed().as_secs_f64()
        }
        #[cfg(not(feature = "std"))]
        {
            0.0
        }
    }
}

/// `R = X − U·Vᵀ` for the current factors.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualState {
    r: DenseMatrix,
}

impl ResidualState {
    pub fn new(x: &DenseMatrix, f: &FactorPair) -> Result<Self> {
        f.check_product_matches(x)?;
        let (us, vs) = f.components();
        let mut r = x.clone();
        subtract_all(&mut r, x, &us, &vs);
        Ok(Self { r })
    }

    pub fn residual(&self) -> &DenseMatrix {
        &self.r
    }

    /// `E_i = R + u_i·v_iᵀ` for 0-based component `i`; `R` is left untouched.
    pub fn residual_for_component(&self, f: &FactorPair, i: usize) -> Result<DenseMatrix> {
        if i >= f.rank() {
            return Err(Error::invalid(alloc::format!("component index {i} out of range for rank {}", f.rank())));
        }
        f.check_product_matches(&self.r)?;
        let mut e = self.r.clone();
        add_outer(&mut e, &self.r, &f.u().column(i), &f.v().column(i), 1.0);
        Ok(e)
    }

    /// Commits updated component vectors: `R ← E_i − u_i·v_iᵀ`.
    pub fn commit(&mut self, e_i: &DenseMatrix, u_i: &[f64], v_i: &[f64]) -> Result<()> {
        if e_i.shape() != self.r.shape() {
            return Err(Error::shape("component residual", e_i.shape(), self.r.shape()));
        }
        if u_i.len() != e_i.rows() || v_i.len() != e_i.cols() {
            return Err(Error::shape("component vectors", (u_i.len(), v_i.len()), e_i.shape()));
        }
        add_outer(&mut self.r, e_i, u_i, v_i, -1.0);
        Ok(())
    }
}

/// Free-function form of [`ResidualState::residual_for_component`].
pub fn residual_for_component(state: &ResidualState, f: &FactorPair, i: usize) -> Result<DenseMatrix> {
    state.residual_for_component(f, i)
}

/// One rank-one update against `E_i`: all of `v_i` first (columns of `E_i`,
/// weights `u_i`), then all of `u_i` (rows of `E_i`, weights the new `v_i`).
/// Degenerate scalar subproblems keep the previous value. Returns the updated
/// vectors and the number of degenerate updates.
pub fn sweep_component(
    e_i: &DenseMatrix,
    u_i: &[f64],
    v_i: &[f64],
    w: Option<&MaskMatrix>,
) -> Result<(Vec<f64>, Vec<f64>, u64)> {
    if u_i.len() != e_i.rows() || v_i.len() != e_i.cols() {
        return Err(Error::shape("component vectors", (u_i.len(), v_i.len()), e_i.shape()));
    }
    if let Some(w) = w {
        w.check_pairs_with(e_i)?;
    }
    let mut u = u_i.to_vec();
    let mut v = v_i.to_vec();
    let mut ws = ScalarWorkspace::new();
    let degenerate = update_component(e_i, w, &mut u, &mut v, &mut ws);
    Ok((u, v, degenerate))
}

fn update_component(
    e: &DenseMatrix,
    w: Option<&MaskMatrix>,
    u: &mut [f64],
    v: &mut [f64],
    ws: &mut ScalarWorkspace,
) -> u64 {
    let (d, n) = e.shape();
    let mut degenerate = 0;

    for (j, vj) in v.iter_mut().enumerate() {
        let sol = match w {
            None => ws.solve_pairs((0..d).map(|r| (e.get(r, j), u[r]))),
            Some(w) => ws.solve_pairs((0..d).map(|r| {
                let wr = f64::from(w.bit(r, j));
                (wr * e.get(r, j), wr * u[r])
            })),
        };
        if sol.degenerate {
            degenerate += 1;
        } else {
            *vj = sol.value;
        }
    }

    for (r, ur) in u.iter_mut().enumerate() {
        let row = e.row(r);
        let sol = match w {
            None => ws.solve_pairs(row.iter().copied().zip(v.iter().copied())),
            Some(w) => ws.solve_pairs(masked_pairs(w.row(r), row, v)),
        };
        if sol.degenerate {
            degenerate += 1;
        } else {
            *ur = sol.value;
        }
    }
    debug_assert_eq!(u.len(), d);
    debug_assert_eq!(v.len(), n);
    degenerate
}

/// `dst = src + sign · u·vᵀ`.
fn add_outer(dst: &mut DenseMatrix, src: &DenseMatrix, u: &[f64], v: &[f64], sign: f64) {
    for (r, &ur) in u.iter().enumerate() {
        let s = sign * ur;
        let out = dst.row_mut(r);
        for ((o, &x), &vc) in out.iter_mut().zip(src.row(r)).zip(v) {
            *o = x + s * vc;
        }
    }
}

/// `r = x − Σ_l u_l·v_lᵀ`, summing the product in component order.
fn subtract_all(r: &mut DenseMatrix, x: &DenseMatrix, us: &[Vec<f64>], vs: &[Vec<f64>]) {
    let (d, n) = x.shape();
    for row in 0..d {
        let out = r.row_mut(row);
        for (c, o) in out.iter_mut().enumerate().take(n) {
            let p: f64 = us.iter().zip(vs).map(|(u, v)| u[row] * v[c]).sum();
            *o = x.get(row, c) - p;
        }
    }
}

pub(crate) fn gaussian_init(d: usize, n: usize, cfg: &SolverConfig) -> (Vec<f64>, Vec<f64>) {
    let k = cfg.rank;
    let mut rng = rng::stream(cfg.seed, Stream::FactorInit);
    let mut u = vec![0.0; d * k];
    let mut v = vec![0.0; n * k];
    match cfg.init {
        Init::Gaussian => {
            rng::fill_standard_normal(&mut rng, &mut u);
            rng::fill_standard_normal(&mut rng, &mut v);
        }
    }
    (u, v)
}

/// Row-major `rows × k` buffer to per-component columns.
pub(crate) fn split_columns(buf: &[f64], rows: usize, k: usize) -> Vec<Vec<f64>> {
    (0..k).map(|l| (0..rows).map(|r| buf[r * k + l]).collect()).collect()
}

pub(crate) fn frob_delta(a: &[Vec<f64>], b: &[Vec<f64>]) -> (f64, f64) {
    let mut diff = 0.0;
    let mut norm = 0.0;
    for (ca, cb) in a.iter().zip(b) {
        for (&x, &y) in ca.iter().zip(cb) {
            diff += (x - y) * (x - y);
            norm += x * x;
        }
    }
    (libm::sqrt(diff), libm::sqrt(norm))
}

fn objective(x: &DenseMatrix, w: Option<&MaskMatrix>, f: &FactorPair) -> Result<f64> {
    match w {
        None => objective_l1(x, f),
        Some(w) => objective_l1_masked(x, w, f),
    }
}

/// Minimizes `‖X − U·Vᵀ‖₁` by alternating closed-form scalar updates.
pub fn factorize_l1(x: &DenseMatrix, cfg: &SolverConfig) -> Result<(FactorPair, RunDiagnostics)> {
    factorize_l1_observed(x, None, cfg, |_, _| {})
}

/// Minimizes `‖W ⊙ (X − U·Vᵀ)‖₁`. Entries of `X` where `W` is 0 never
/// influence the result.
pub fn factorize_l1_masked(
    x: &DenseMatrix,
    w: &MaskMatrix,
    cfg: &SolverConfig,
) -> Result<(FactorPair, RunDiagnostics)> {
    factorize_l1_observed(x, Some(w), cfg, |_, _| {})
}

/// Shared engine; `observer(sweep, objective)` is called after every sweep.
pub fn factorize_l1_observed(
    x: &DenseMatrix,
    w: Option<&MaskMatrix>,
    cfg: &SolverConfig,
    mut observer: impl FnMut(usize, f64),
) -> Result<(FactorPair, RunDiagnostics)> {
    let clock = Stopwatch::start();
    let (d, n) = x.shape();
    cfg.check(d, n)?;
    if let Some(w) = w {
        w.check_pairs_with(x)?;
    }
    let k = cfg.rank;

    let (u0, v0) = gaussian_init(d, n, cfg);
    let mut us = split_columns(&u0, d, k);
    let mut vs = split_columns(&v0, n, k);

    let mut r = x.clone();
    subtract_all(&mut r, x, &us, &vs);
    let mut e = r.clone();
    let mut ws = ScalarWorkspace::new();
    let mut diag = RunDiagnostics::default();
    if cfg.validate {
        let f = FactorPair::from_components(&us, &vs)?;
        diag.step_objectives.push(objective(x, w, &f)?);
    }

    for sweep in 1..=cfg.max_sweeps {
        let u_prev = us.clone();
        for i in 0..k {
            add_outer(&mut e, &r, &us[i], &vs[i], 1.0);
            diag.degenerate_updates += update_component(&e, w, &mut us[i], &mut vs[i], &mut ws);
            add_outer(&mut r, &e, &us[i], &vs[i], -1.0);
            if cfg.validate {
                let f = FactorPair::from_components(&us, &vs)?;
                diag.step_objectives.push(objective(x, w, &f)?);
            }
        }
        if sweep % RESIDUAL_REFRESH == 0 {
            subtract_all(&mut r, x, &us, &vs);
        }

        let f = FactorPair::from_components(&us, &vs)?;
        let obj = objective(x, w, &f)?;
        diag.objective_trace.push(obj);
        diag.sweeps_run = sweep;
        observer(sweep, obj);

        let (delta, norm) = frob_delta(&us, &u_prev);
        if delta <= cfg.tol * norm.max(1.0) {
            diag.converged = true;
            break;
        }
    }

    diag.zero_components = us.iter().filter(|u| u.iter().all(|&x| x == 0.0)).count();
    diag.wall_time = clock.seconds();
    Ok((FactorPair::from_components(&us, &vs)?, diag))
}
