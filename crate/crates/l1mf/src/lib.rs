//! File formats, benchmarks and the command-line front end for
//! [`l1mf_core`].
//!
//! * [`io`] reads and writes CSV matrices and masks (`nan` marks a missing
//!   entry).
//! * [`bench`] runs seeded multi-trial experiments over the synthetic
//!   presets, in parallel, and collects them into a [`report::BenchReport`].
//! * [`oracle_check`] cross-checks the scalar solvers against brute force.
//! * [`cli`] is the `l1mf` binary.

pub mod bench;
pub mod cli;
mod error;
pub mod io;
pub mod oracle_check;
pub mod report;

pub use error::{Error, Result};
