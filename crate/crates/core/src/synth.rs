//! Seeded synthetic scenarios: a Gaussian low-rank ground truth, a fraction
//! of entries turned into outliers, and a fraction marked missing.
//!
//! Each role draws from its own ChaCha20 stream of the scenario seed (ground
//! truth, outlier positions, outlier values, missing positions), so the
//! draws for one role do not depend on the parameters of another.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::index;
use rand_distr::{Distribution, Uniform};

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, FactorPair, MaskMatrix};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutlierMode {
    /// Overwrite the entry with `Uniform(−r, r)`.
    Replace,
    /// Add `Uniform(−r, r)` to the entry.
    Add,
}

impl OutlierMode {
    pub fn name(self) -> &'static str {
        match self {
            OutlierMode::Replace => "replace",
            OutlierMode::Add => "add",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub d: usize,
    pub n: usize,
    pub rank: usize,
    pub outlier_fraction: f64,
    /// Half-width `r` of the outlier interval `[−r, r]`.
    pub outlier_range: f64,
    pub outlier_mode: OutlierMode,
    pub missing_fraction: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 {
            return Err(Error::invalid("scenario dimensions must be positive"));
        }
        if self.rank == 0 || self.rank > self.d.min(self.n) {
            return Err(Error::RankTooLarge { rank: self.rank, max: self.d.min(self.n) });
        }
        for (name, f) in [("outlier_fraction", self.outlier_fraction), ("missing_fraction", self.missing_fraction)] {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::invalid(alloc::format!("{name} must lie in [0, 1], got {f}")));
            }
        }
        if !(self.outlier_range >= 0.0 && self.outlier_range.is_finite()) {
            return Err(Error::invalid(alloc::format!(
                "outlier_range must be finite and non-negative, got {}",
                self.outlier_range
            )));
        }
        Ok(())
    }

    pub fn outlier_count(&self) -> usize {
        fraction_count(self.outlier_fraction, self.d * self.n)
    }

    pub fn missing_count(&self) -> usize {
        fraction_count(self.missing_fraction, self.d * self.n)
    }
}

/// `⌊fraction · total⌋`, nudged so that e.g. 0.29 · 100 counts as 29.
fn fraction_count(fraction: f64, total: usize) -> usize {
    let raw = fraction * total as f64;
    (libm::floor(raw + 1e-9 * (1.0 + raw)) as usize).min(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticInstance {
    pub x_true: DenseMatrix,
    /// Corrupted observations; missing entries hold 0.0.
    pub x_corrupt: DenseMatrix,
    pub mask: MaskMatrix,
    /// `(row, col)` of every outlier, ascending in row-major order. May
    /// overlap missing entries.
    pub outlier_positions: Vec<(usize, usize)>,
}

impl SyntheticInstance {
    pub fn has_missing(&self) -> bool {
        !self.mask.is_all_ones()
    }
}

/// `X = U·Vᵀ` with i.i.d. standard normal `U` (d × rank) and `V` (n × rank).
pub fn gen_lowrank(d: usize, n: usize, rank: usize, seed: u64) -> Result<(DenseMatrix, FactorPair)> {
    if d == 0 || n == 0 {
        return Err(Error::invalid("matrix dimensions must be positive"));
    }
    if rank == 0 || rank > d.min(n) {
        return Err(Error::RankTooLarge { rank, max: d.min(n) });
    }
    let mut rng = rng::stream(seed, Stream::GroundTruth);
    let mut u = vec![0.0; d * rank];
    let mut v = vec![0.0; n * rank];
    rng::fill_standard_normal(&mut rng, &mut u);
    rng::fill_standard_normal(&mut rng, &mut v);
    let f = FactorPair::new(DenseMatrix::from_vec(d, rank, u)?, DenseMatrix::from_vec(n, rank, v)?)?;
    Ok((f.product(), f))
}

/// Applies the outlier and missing-data protocol of `spec` to `x_true`.
pub fn corrupt(x_true: &DenseMatrix, spec: &ScenarioSpec) -> Result<SyntheticInstance> {
    spec.validate()?;
    if x_true.shape() != (spec.d, spec.n) {
        return Err(Error::shape("scenario vs matrix", (spec.d, spec.n), x_true.shape()));
    }
    let (d, n) = x_true.shape();
    let total = d * n;

    let mut pos_rng = rng::stream(spec.seed, Stream::OutlierPositions);
    let mut positions = index::sample(&mut pos_rng, total, spec.outlier_count()).into_vec();
    positions.sort_unstable();

    let mut val_rng = rng::stream(spec.seed, Stream::OutlierValues);
    let r = spec.outlier_range;
    let dist = Uniform::new_inclusive(-r, r).map_err(|e| Error::invalid(alloc::format!("{e}")))?;
    let mut x_corrupt = x_true.clone();
    let data = x_corrupt.as_mut_slice();
    for &p in &positions {
        let noise: f64 = dist.sample(&mut val_rng);
        data[p] = match spec.outlier_mode {
            OutlierMode::Replace => noise,
            OutlierMode::Add => data[p] + noise,
        };
    }

    let mut miss_rng = rng::stream(spec.seed, Stream::MissingPositions);
    let mut mask = MaskMatrix::ones(d, n)?;
    for p in index::sample(&mut miss_rng, total, spec.missing_count()) {
        mask.clear(p / n, p % n);
        x_corrupt.set(p / n, p % n, 0.0);
    }

    Ok(SyntheticInstance {
        x_true: x_true.clone(),
        x_corrupt,
        mask,
        outlier_positions: positions.into_iter().map(|p| (p / n, p % n)).collect(),
    })
}

/// Ground truth plus corruption for `spec`; also returns the true factors.
pub fn generate(spec: &ScenarioSpec) -> Result<(SyntheticInstance, FactorPair)> {
    spec.validate()?;
    let (x, f) = gen_lowrank(spec.d, spec.n, spec.rank, spec.seed)?;
    Ok((corrupt(&x, spec)?, f))
}

/// Named experimental protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 30×30, rank 3, 10% replaced by `U(−40, 40)`.
    E1,
    /// 7000×7000, rank 3, 10% replaced by `U(−40, 40)`.
    E2,
    /// As E2 with `U(−400, 400)`.
    E3,
    /// As E2 with `U(−4000, 4000)`.
    E4,
    /// 20×30, rank 3, 5% missing, 10% with `U(−5, 5)` added.
    E7,
    /// 10000×700, rank 40, 20% missing, 10% with `U(−5, 5)` added.
    E8,
}

impl Preset {
    pub const ALL: [Preset; 6] = [Preset::E1, Preset::E2, Preset::E3, Preset::E4, Preset::E7, Preset::E8];

    pub fn name(self) -> &'static str {
        match self {
            Preset::E1 => "e1",
            Preset::E2 => "e2",
            Preset::E3 => "e3",
            Preset::E4 => "e4",
            Preset::E7 => "e7",
            Preset::E8 => "e8",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL.into_iter().find(|p| p.name().eq_ignore_ascii_case(s)).ok_or_else(|| {
            Error::invalid(alloc::format!("unknown preset '{s}' (expected one of e1, e2, e3, e4, e7, e8)"))
        })
    }
}

/// Scenario parameters for `preset`. `scale` multiplies `d` and `n` (floored
/// at 10) and, for E8 only, the rank (floored at 1); `scale = 1` gives the
/// original sizes.
pub fn preset(preset: Preset, scale: f64, seed: u64) -> Result<ScenarioSpec> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::invalid(alloc::format!("scale must be positive, got {scale}")));
    }
    let dim = |base: usize| ((libm::round(base as f64 * scale)) as usize).max(10);
    let replace = |base_d, base_n, r| ScenarioSpec {
        d: dim(base_d),
        n: dim(base_n),
        rank: 3,
        outlier_fraction: 0.10,
        outlier_range: r,
        outlier_mode: OutlierMode::Replace,
        missing_fraction: 0.0,
        seed,
    };
    let spec = match preset {
        Preset::E1 => replace(30, 30, 40.0),
        Preset::E2 => replace(7000, 7000, 40.0),
        Preset::E3 => replace(7000, 7000, 400.0),
        Preset::E4 => replace(7000, 7000, 4000.0),
        Preset::E7 => ScenarioSpec {
            d: dim(20),
            n: dim(30),
            rank: 3,
            outlier_fraction: 0.10,
            outlier_range: 5.0,
            outlier_mode: OutlierMode::Add,
            missing_fraction: 0.05,
            seed,
        },
        Preset::E8 => ScenarioSpec {
            d: dim(10000),
            n: dim(700),
            rank: (libm::round(40.0 * scale) as usize).max(1),
            outlier_fraction: 0.10,
            outlier_range: 5.0,
            outlier_mode: OutlierMode::Add,
            missing_fraction: 0.20,
            seed,
        },
    };
    let mut spec = spec;
    spec.rank = spec.rank.min(spec.d.min(spec.n));
    Ok(spec)
}
