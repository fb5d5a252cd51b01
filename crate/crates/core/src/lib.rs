//! L1-norm low-rank matrix factorization robust to outliers and missing data.
//!
//! The factorization `X ≈ U·Vᵀ` is found by cycling over the `k` rank-one
//! components and, within a component, over every scalar entry of `v_i` and
//! `u_i`. Each scalar subproblem `min_v ‖e − u·v‖₁` is convex and is solved in
//! closed form as a weighted median of the ratios `e_j / u_j` ([`scalar`]), so
//! no inner numerical optimizer is needed. The full-data and masked sweep
//! engines live in [`factorize`]; [`baseline`] holds the L2 alternating least
//! squares comparison methods and [`synth`] the seeded synthetic scenarios.
//!
//! The crate is `no_std` (with `alloc`). The default `std` feature only adds
//! wall-clock timing to [`RunDiagnostics`].
//!
//! ```
//! use l1mf_core::{factorize_l1, objective_l1, synth, SolverConfig};
//!
//! let (x, _) = synth::gen_lowrank(12, 9, 1, 5).unwrap();
//! let (factors, diag) = factorize_l1(&x, &SolverConfig::new(1).with_seed(3)).unwrap();
//! assert!(objective_l1(&x, &factors).unwrap() <= 1e-8 * x.l1_norm());
//! assert_eq!(diag.sweeps_run, diag.objective_trace.len());
//! ```

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod baseline;
mod error;
pub mod factorize;
mod matrix;
mod metrics;
mod rng;
pub mod scalar;
pub mod synth;

pub use baseline::{factorize_l2_als, factorize_l2_als_masked};
pub use error::{Error, Result};
pub use factorize::{
    factorize_l1, factorize_l1_masked, factorize_l1_observed, residual_for_component, sweep_component, Init,
    ResidualState, RunDiagnostics, SolverConfig,
};
pub use matrix::{DenseMatrix, FactorPair, MaskMatrix};
pub use metrics::{
    objective_l1, objective_l1_masked, rel_frob_error, rel_frob_error_masked, squared_frob_error,
    squared_frob_error_masked,
};
pub use scalar::{
    l1_line_objective, oracle_breakpoint_min, solve_general, solve_masked, solve_positive, MedianScratch,
    ScalarSolution, ScalarWorkspace, SignReduction,
};
