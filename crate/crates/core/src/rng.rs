//! Seeded random streams.
//!
//! Every random draw in the crate comes from ChaCha20 (`rand_chacha`), keyed
//! with `ChaCha20Rng::seed_from_u64(seed)` and switched to a fixed stream per
//! role, so e.g. changing the missing fraction of a scenario does not perturb
//! its outlier draws. Standard normals use `rand_distr::StandardNormal`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub(crate) enum Stream {
    FactorInit = 0,
    GroundTruth = 1,
    OutlierPositions = 2,
    OutlierValues = 3,
    MissingPositions = 4,
}

pub(crate) fn stream(seed: u64, role: Stream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(role as u64);
    rng
}

pub(crate) fn fill_standard_normal(rng: &mut ChaCha20Rng, out: &mut [f64]) {
    for x in out {
        *x = rng.sample(StandardNormal);
    }
}
