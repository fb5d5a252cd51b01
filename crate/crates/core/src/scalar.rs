//! Closed-form minimizers of the scalar L1 regression `f(v) = Σ_j |e_j − u_j·v|`.
//!
//! `f` is convex and piecewise linear with breakpoints at the ratios
//! `e_j / u_j` (over `u_j ≠ 0`). For strictly positive weights the minimizer is
//! a weighted median of those ratios: sort them ascending, form the sequence
//! `Γ = (a_0, …, a_d)` with `a_i = Σ_{first i} u − Σ_{rest} u`, and return the
//! ratio at the first index where `Γ` turns non-negative ([`solve_positive`]).
//! General weights are reduced to that case by dropping zero weights and
//! flipping the sign of each target whose weight is negative
//! ([`SignReduction`], [`solve_general`]). A binary mask is applied by zeroing
//! both target and weight before the reduction ([`solve_masked`]).
//!
//! [`oracle_breakpoint_min`] is an O(d²) exhaustive reference used only by
//! tests and the `oracle-check` harness.

use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};

/// `Σ_j |e_j − u_j·v|`.
pub fn l1_line_objective(e: &[f64], u: &[f64], v: f64) -> Result<f64> {
    check_len(e.len(), u.len())?;
    Ok(e.iter().zip(u).map(|(&ej, &uj)| (ej - uj * v).abs()).sum())
}

/// Sorted-ratio state of the positive-weight solver.
///
/// `labels` are 0-based positions ordered by ascending `target / weight`
/// (stable: equal ratios keep ascending position order). `gamma` has `d + 1`
/// entries and `pivot` is the 1-based index of its first non-negative entry;
/// the minimizer is the ratio at `labels[pivot - 1]`.
#[derive(Debug, Clone, Default)]
pub struct MedianScratch {
    order: Vec<(f64, usize)>,
    labels: Vec<usize>,
    gamma: Vec<f64>,
    pivot: usize,
}

impl MedianScratch {
    /// Builds the scratch for strictly positive `weights`.
    pub fn new(targets: &[f64], weights: &[f64]) -> Result<Self> {
        check_len(targets.len(), weights.len())?;
        if targets.is_empty() {
            return Err(Error::invalid("weighted median of an empty vector"));
        }
        if let Some(j) = weights.iter().position(|&w| w.is_nan() || w <= 0.0) {
            return Err(Error::invalid(alloc::format!(
                "weight {} at position {j} is not strictly positive",
                weights[j]
            )));
        }
        let mut scratch = Self::default();
        scratch.fill(targets, weights);
        Ok(scratch)
    }

    /// Recomputes the scratch in place. Inputs must be non-empty, of equal
    /// length, with strictly positive weights.
    pub(crate) fn fill(&mut self, targets: &[f64], weights: &[f64]) {
        debug_assert!(!targets.is_empty() && targets.len() == weights.len());
        let d = targets.len();

        self.order.clear();
        self.order.extend(targets.iter().zip(weights).enumerate().map(|(j, (t, w))| (t / w, j)));
        // Stable sort, so ties stay in ascending position order.
        self.order.sort_by(|a, b| a.0.total_cmp(&b.0));

        self.labels.clear();
        self.labels.extend(self.order.iter().map(|&(_, j)| j));

        let total: f64 = self.labels.iter().map(|&j| weights[j]).sum();
        self.gamma.clear();
        self.gamma.reserve(d + 1);
        self.gamma.push(-total);
        let mut prefix = 0.0;
        self.pivot = 0;
        for (i, &j) in self.labels.iter().enumerate() {
            prefix += weights[j];
            let a = 2.0 * prefix - total;
            self.gamma.push(a);
            if self.pivot == 0 && a >= 0.0 {
                self.pivot = i + 1;
            }
        }
        // a_d == total > 0, so the pivot is always found; guard against
        // rounding anyway.
        if self.pivot == 0 {
            self.pivot = d;
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn pivot(&self) -> usize {
        self.pivot
    }

    /// Position (0-based) of the selected breakpoint.
    pub fn selected_label(&self) -> usize {
        self.labels[self.pivot - 1]
    }

    /// The minimizing ratio `target / weight` at the selected label.
    pub fn minimizer(&self) -> f64 {
        self.order[self.pivot - 1].0
    }
}

/// Weighted median of `e_j / u_j` for strictly positive `u`; the global
/// minimizer of [`l1_line_objective`].
pub fn solve_positive(e: &[f64], u: &[f64]) -> Result<f64> {
    Ok(MedianScratch::new(e, u)?.minimizer())
}

/// Reduction of a general weight vector to the strictly positive case.
///
/// Keeps the positions with `u_j ≠ 0` (exact zero only) in ascending order and
/// multiplies target and weight by `sign(u_j)`, which leaves every ratio and
/// every term `|e_j − u_j·v|` unchanged.
#[derive(Debug, Clone, Default)]
pub struct SignReduction {
    kept_labels: Vec<usize>,
    weights: Vec<f64>,
    targets: Vec<f64>,
    abs_weights: Vec<f64>,
    flipped_targets: Vec<f64>,
}

impl SignReduction {
    pub fn new(e: &[f64], u: &[f64]) -> Result<Self> {
        check_len(e.len(), u.len())?;
        let mut r = Self::default();
        r.fill(e.iter().copied().zip(u.iter().copied()));
        Ok(r)
    }

    pub(crate) fn fill(&mut self, pairs: impl Iterator<Item = (f64, f64)>) {
        self.kept_labels.clear();
        self.weights.clear();
        self.targets.clear();
        self.abs_weights.clear();
        self.flipped_targets.clear();
        for (j, (ej, uj)) in pairs.enumerate() {
            if uj == 0.0 {
                continue;
            }
            let sign = if uj > 0.0 { 1.0 } else { -1.0 };
            self.kept_labels.push(j);
            self.weights.push(uj);
            self.targets.push(ej);
            self.abs_weights.push(sign * uj);
            self.flipped_targets.push(sign * ej);
        }
    }

    pub fn kept_labels(&self) -> &[usize] {
        &self.kept_labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn abs_weights(&self) -> &[f64] {
        &self.abs_weights
    }

    pub fn flipped_targets(&self) -> &[f64] {
        &self.flipped_targets
    }

    pub fn is_empty(&self) -> bool {
        self.kept_labels.is_empty()
    }
}

/// Minimizer returned by the general and masked solvers.
///
/// `degenerate` is set when every effective weight is zero, so the objective
/// is constant and `value` is 0.0 by convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarSolution {
    pub value: f64,
    pub degenerate: bool,
}

impl ScalarSolution {
    pub const DEGENERATE: ScalarSolution = ScalarSolution { value: 0.0, degenerate: true };
}

/// Reusable buffers for repeated scalar solves.
///
/// The sweep engines solve `n + d` subproblems per component; reusing one
/// workspace keeps them allocation-free after warm-up.
#[derive(Debug, Clone, Default)]
pub struct ScalarWorkspace {
    reduction: SignReduction,
    scratch: MedianScratch,
}

impl ScalarWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Solves `min_v Σ |e_j − u_j·v|` over the `(e_j, u_j)` pairs.
    pub fn solve_pairs(&mut self, pairs: impl Iterator<Item = (f64, f64)>) -> ScalarSolution {
        self.reduction.fill(pairs);
        if self.reduction.is_empty() {
            return ScalarSolution::DEGENERATE;
        }
        self.scratch.fill(&self.reduction.flipped_targets, &self.reduction.abs_weights);
        ScalarSolution { value: self.scratch.minimizer(), degenerate: false }
    }

    pub fn reduction(&self) -> &SignReduction {
        &self.reduction
    }

    /// Scratch of the last non-degenerate solve.
    pub fn scratch(&self) -> &MedianScratch {
        &self.scratch
    }
}

/// Global minimizer of [`l1_line_objective`] for arbitrary real weights.
pub fn solve_general(e: &[f64], u: &[f64]) -> Result<ScalarSolution> {
    check_len(e.len(), u.len())?;
    Ok(ScalarWorkspace::new().solve_pairs(e.iter().copied().zip(u.iter().copied())))
}

/// Minimizer of `Σ_j w_j·|e_j − u_j·v|` for a binary mask `w`: the general
/// solver applied to `(w ⊙ e, w ⊙ u)`.
pub fn solve_masked(w: &[u8], e: &[f64], u: &[f64]) -> Result<ScalarSolution> {
    check_len(w.len(), e.len())?;
    check_len(e.len(), u.len())?;
    check_binary(w)?;
    Ok(ScalarWorkspace::new().solve_pairs(masked_pairs(w, e, u)))
}

pub(crate) fn masked_pairs<'a>(w: &'a [u8], e: &'a [f64], u: &'a [f64]) -> impl Iterator<Item = (f64, f64)> + 'a {
    w.iter().zip(e).zip(u).map(|((&wj, &ej), &uj)| {
        let wj = f64::from(wj);
        (wj * ej, wj * uj)
    })
}

fn check_binary(w: &[u8]) -> Result<()> {
    match w.iter().position(|&b| b > 1) {
        Some(index) => Err(Error::NonBinaryMask { index, value: w[index] }),
        None => Ok(()),
    }
}

/// Exhaustive reference: evaluates the objective at every breakpoint
/// `e_j / u_j` (`u_j ≠ 0`) and returns `(argmin, min)`, ties going to the
/// smallest breakpoint. O(d²); never used by the solvers.
pub fn oracle_breakpoint_min(e: &[f64], u: &[f64]) -> Result<(f64, f64)> {
    check_len(e.len(), u.len())?;
    let mut best: Option<(f64, f64)> = None;
    for (&ej, &uj) in e.iter().zip(u) {
        if uj == 0.0 {
            continue;
        }
        let v = ej / uj;
        let f = l1_line_objective(e, u, v)?;
        best = match best {
            Some((bv, bf)) if bf < f || (bf == f && bv <= v) => Some((bv, bf)),
            _ => Some((v, f)),
        };
    }
    best.ok_or_else(|| Error::invalid("oracle needs at least one nonzero weight"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn line_objective_examples() {
        let e = [0.5, -1.5, 2.0];
        assert_eq!(l1_line_objective(&e, &e, 1.0).unwrap(), 0.0);
        assert_eq!(l1_line_objective(&[1.0, 2.0, 3.0], &[1.0; 3], 2.0).unwrap(), 2.0);
        assert_eq!(l1_line_objective(&[], &[], 17.0).unwrap(), 0.0);
        assert!(matches!(l1_line_objective(&[1.0], &[], 0.0), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn positive_examples() {
        let s = MedianScratch::new(&[1.0, 2.0, 3.0], &[1.0; 3]).unwrap();
        assert_eq!(s.gamma(), &[-3.0, -1.0, 1.0, 3.0]);
        assert_eq!(s.pivot(), 2);
        assert_eq!(s.minimizer(), 2.0);

        let u = [0.5, 2.0, 4.0];
        let e: Vec<f64> = u.iter().map(|x| -1.25 * x).collect();
        assert_eq!(solve_positive(&e, &u).unwrap(), -1.25);

        let s = MedianScratch::new(&[3.0, 1.0], &[1.0, 2.0]).unwrap();
        assert_eq!(s.labels(), &[1, 0]);
        assert_eq!(s.gamma(), &[-3.0, 1.0, 3.0]);
        assert_eq!(s.pivot(), 1);
        assert_eq!(s.minimizer(), 0.5);
        // Breakpoint enumeration: f(0.5) = 2.5 < f(3) = 5.
        assert_eq!(l1_line_objective(&[3.0, 1.0], &[1.0, 2.0], 0.5).unwrap(), 2.5);
        assert_eq!(l1_line_objective(&[3.0, 1.0], &[1.0, 2.0], 3.0).unwrap(), 5.0);
    }

    #[test]
    fn positive_rejects_bad_weights() {
        assert!(solve_positive(&[1.0, 2.0], &[1.0, 0.0]).is_err());
        assert!(solve_positive(&[1.0], &[-1.0]).is_err());
        assert!(solve_positive(&[], &[]).is_err());
        assert!(solve_positive(&[1.0], &[f64::NAN]).is_err());
    }

    #[test]
    fn zero_gamma_selects_left_endpoint() {
        // Equal weights over two points: a_1 == 0, so the left ratio wins.
        let s = MedianScratch::new(&[1.0, 5.0], &[1.0, 1.0]).unwrap();
        assert_eq!(s.gamma()[1], 0.0);
        assert_eq!(s.pivot(), 1);
        assert_eq!(s.minimizer(), 1.0);
    }

    #[test]
    fn general_examples() {
        assert_eq!(solve_general(&[1.0, 2.0], &[0.0, 0.0]).unwrap(), ScalarSolution::DEGENERATE);

        let r = SignReduction::new(&[3.0, -1.0], &[1.0, -2.0]).unwrap();
        assert_eq!(r.flipped_targets(), &[3.0, 1.0]);
        assert_eq!(r.abs_weights(), &[1.0, 2.0]);
        assert_eq!(solve_general(&[3.0, -1.0], &[1.0, -2.0]).unwrap().value, 0.5);

        let s = solve_general(&[5.0, 7.0, 0.0], &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(s, ScalarSolution { value: 0.0, degenerate: false });
        assert!(solve_general(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn sign_reduction_invariants() {
        let e = [1.0, -2.0, 0.0, 4.0, 3.0];
        let u = [0.0, -0.5, 2.0, 0.0, -3.0];
        let r = SignReduction::new(&e, &u).unwrap();
        assert_eq!(r.kept_labels(), &[1, 2, 4]);
        assert_eq!(r.targets(), &[-2.0, 0.0, 3.0]);
        assert_eq!(r.weights(), &[-0.5, 2.0, -3.0]);
        assert!(r.abs_weights().iter().all(|&w| w > 0.0));
        for j in 0..3 {
            assert_eq!(r.flipped_targets()[j] / r.abs_weights()[j], r.targets()[j] / r.weights()[j]);
        }
    }

    #[test]
    fn masked_examples() {
        let e = [2.0, 9.0, 4.0];
        let u = [1.0, 5.0, 2.0];
        assert_eq!(solve_masked(&[1, 1, 1], &e, &u).unwrap(), solve_general(&e, &u).unwrap());
        assert_eq!(solve_masked(&[1, 0, 1], &e, &u).unwrap(), ScalarSolution { value: 2.0, degenerate: false });
        assert_eq!(solve_masked(&[0, 0, 0], &e, &u).unwrap(), ScalarSolution::DEGENERATE);
        assert_eq!(solve_masked(&[1, 3, 0], &e, &u), Err(Error::NonBinaryMask { index: 1, value: 3 }));
        assert!(solve_masked(&[1, 1], &e, &u).is_err());
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(oracle_breakpoint_min(&[1.0, 2.0, 3.0], &[1.0; 3]).unwrap(), (2.0, 2.0));
        assert_eq!(oracle_breakpoint_min(&[4.0], &[2.0]).unwrap(), (2.0, 0.0));
        assert_eq!(oracle_breakpoint_min(&[3.0, -1.0], &[1.0, -2.0]).unwrap(), (0.5, 2.5));
        assert!(oracle_breakpoint_min(&[1.0, 2.0], &[0.0, 0.0]).is_err());
        // Ties go to the smaller breakpoint.
        assert_eq!(oracle_breakpoint_min(&[5.0, 1.0], &[1.0, 1.0]).unwrap(), (1.0, 4.0));
    }

    #[test]
    fn workspace_reuse_matches_fresh_solve() {
        let mut ws = ScalarWorkspace::new();
        let cases: [(&[f64], &[f64]); 3] =
            [(&[1.0, 2.0, 3.0, 4.0], &[1.0, -1.0, 0.5, 0.0]), (&[7.0], &[0.0]), (&[-1.0, 2.0], &[3.0, 1.0])];
        for (e, u) in cases {
            let got = ws.solve_pairs(e.iter().copied().zip(u.iter().copied()));
            assert_eq!(got, solve_general(e, u).unwrap());
        }
    }

    fn vec_pair(max_len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1..=max_len).prop_flat_map(|d| {
            (
                proptest::collection::vec(-10.0..10.0f64, d),
                proptest::collection::vec(prop_oneof![3 => -5.0..5.0f64, 1 => Just(0.0)], d),
            )
        })
    }

    fn gamma_is_safe(e: &[f64], u: &[f64]) -> bool {
        let r = SignReduction::new(e, u).unwrap();
        if r.is_empty() {
            return false;
        }
        let s = MedianScratch::new(r.flipped_targets(), r.abs_weights()).unwrap();
        let total = s.gamma()[s.gamma().len() - 1];
        s.gamma().iter().all(|a| a.abs() > 1e-9 * total)
    }

    proptest! {
        #[test]
        fn matches_oracle((e, u) in vec_pair(30)) {
            prop_assume!(u.iter().any(|&x| x != 0.0));
            let s = solve_general(&e, &u).unwrap();
            prop_assert!(!s.degenerate);
            let (_, best) = oracle_breakpoint_min(&e, &u).unwrap();
            let got = l1_line_objective(&e, &u, s.value).unwrap();
            prop_assert!((got - best).abs() <= 1e-12 * (1.0 + best));
        }

        #[test]
        fn locally_optimal((e, u) in vec_pair(30)) {
            let v = solve_general(&e, &u).unwrap().value;
            let f = l1_line_objective(&e, &u, v).unwrap();
            for delta in [1e-6, -1e-6, 1e-3, -1e-3, 1.0, -1.0] {
                prop_assert!(f <= l1_line_objective(&e, &u, v + delta).unwrap() + 1e-12);
            }
        }

        #[test]
        fn gamma_structure((e, u) in vec_pair(30)) {
            let u: Vec<f64> = u.iter().map(|x| x.abs() + 0.01).collect();
            let s = MedianScratch::new(&e, &u).unwrap();
            let g = s.gamma();
            prop_assert_eq!(g.len(), e.len() + 1);
            prop_assert!(g[0] < 0.0 && g[e.len()] > 0.0);
            prop_assert!(g.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(g[s.pivot()] >= 0.0 && g[..s.pivot()].iter().all(|&a| a < 0.0));
            let ratios: Vec<f64> = s.labels().iter().map(|&j| e[j] / u[j]).collect();
            prop_assert!(ratios.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn target_scaling((e, u) in vec_pair(20), alpha in 0.01..100.0f64) {
            prop_assume!(gamma_is_safe(&e, &u));
            let v = solve_general(&e, &u).unwrap().value;
            let scaled: Vec<f64> = e.iter().map(|x| alpha * x).collect();
            let vs = solve_general(&scaled, &u).unwrap().value;
            prop_assert!((vs - alpha * v).abs() <= 1e-9 * (1.0 + (alpha * v).abs()));
        }

        #[test]
        fn weight_scaling((e, u) in vec_pair(20), alpha in 0.01..100.0f64) {
            prop_assume!(gamma_is_safe(&e, &u));
            let v = solve_general(&e, &u).unwrap().value;
            let scaled: Vec<f64> = u.iter().map(|x| alpha * x).collect();
            let vs = solve_general(&e, &scaled).unwrap().value;
            prop_assert!((vs - v / alpha).abs() <= 1e-9 * (1.0 + (v / alpha).abs()));
        }

        #[test]
        fn sign_antisymmetry((e, u) in vec_pair(20)) {
            prop_assume!(gamma_is_safe(&e, &u));
            let mut ratios: Vec<f64> = e.iter().zip(&u).filter(|(_, &b)| b != 0.0).map(|(a, b)| a / b).collect();
            ratios.sort_by(f64::total_cmp);
            prop_assume!(ratios.windows(2).all(|w| w[0] != w[1]));
            let neg: Vec<f64> = u.iter().map(|x| -x).collect();
            prop_assert_eq!(solve_general(&e, &neg).unwrap().value, -solve_general(&e, &u).unwrap().value);
        }

        #[test]
        fn masked_positions_are_ignored(
            (e, u) in vec_pair(20),
            seed in any::<u64>(),
            junk in -1e6..1e6f64,
        ) {
            let w: Vec<u8> = (0..e.len()).map(|j| ((seed >> (j % 64)) & 1) as u8).collect();
            let base = solve_masked(&w, &e, &u).unwrap();
            let mut e2 = e.clone();
            let mut u2 = u.clone();
            for j in 0..e.len() {
                if w[j] == 0 {
                    e2[j] = junk;
                    u2[j] = -junk / 3.0 + 1.0;
                }
            }
            prop_assert_eq!(solve_masked(&w, &e2, &u2).unwrap(), base);
        }
    }

    #[test]
    fn degenerate_value_is_zero() {
        let s = solve_masked(&[0, 0], &[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert!(s.degenerate && s.value == 0.0);
        let s = solve_general(&[1.0; 4], &[0.0; 4]).unwrap();
        assert!(s.degenerate && s.value == 0.0);
    }
}
