//! Accuracy and objective measures for a factorization `X ≈ U·Vᵀ`.

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, FactorPair, MaskMatrix};

/// `‖X − U·Vᵀ‖_F / ‖X‖_F`.
pub fn rel_frob_error(x: &DenseMatrix, f: &FactorPair) -> Result<f64> {
    f.check_product_matches(x)?;
    let denom = x.frob_norm();
    if denom == 0.0 {
        return Err(Error::DivideByZero("‖X‖_F is zero"));
    }
    Ok(libm::sqrt(squared_frob_error(x, f)?) / denom)
}

/// `‖W ⊙ (X − U·Vᵀ)‖_F / ‖W ⊙ X‖_F`.
pub fn rel_frob_error_masked(x: &DenseMatrix, w: &MaskMatrix, f: &FactorPair) -> Result<f64> {
    f.check_product_matches(x)?;
    w.check_pairs_with(x)?;
    let denom: f64 = masked_entries(x, w).map(|(r, c)| x.get(r, c) * x.get(r, c)).sum();
    if denom == 0.0 {
        return Err(Error::DivideByZero("‖W ⊙ X‖_F is zero"));
    }
    Ok(libm::sqrt(squared_frob_error_masked(x, w, f)?) / libm::sqrt(denom))
}

/// `‖X − U·Vᵀ‖_F²`.
pub fn squared_frob_error(x: &DenseMatrix, f: &FactorPair) -> Result<f64> {
    f.check_product_matches(x)?;
    Ok(all_entries(x).map(|(r, c)| sq(x.get(r, c) - f.product_entry(r, c))).sum())
}

/// `‖W ⊙ (X − U·Vᵀ)‖_F²`.
pub fn squared_frob_error_masked(x: &DenseMatrix, w: &MaskMatrix, f: &FactorPair) -> Result<f64> {
    f.check_product_matches(x)?;
    w.check_pairs_with(x)?;
    Ok(masked_entries(x, w).map(|(r, c)| sq(x.get(r, c) - f.product_entry(r, c))).sum())
}

/// `‖X − U·Vᵀ‖_{L1}`, the sum of absolute residuals.
pub fn objective_l1(x: &DenseMatrix, f: &FactorPair) -> Result<f64> {
    f.check_product_matches(x)?;
    Ok(all_entries(x).map(|(r, c)| (x.get(r, c) - f.product_entry(r, c)).abs()).sum())
}

/// `‖W ⊙ (X − U·Vᵀ)‖_{L1}`.
pub fn objective_l1_masked(x: &DenseMatrix, w: &MaskMatrix, f: &FactorPair) -> Result<f64> {
    f.check_product_matches(x)?;
    w.check_pairs_with(x)?;
    Ok(masked_entries(x, w).map(|(r, c)| (x.get(r, c) - f.product_entry(r, c)).abs()).sum())
}

#[inline]
fn sq(x: f64) -> f64 {
    x * x
}

fn all_entries(x: &DenseMatrix) -> impl Iterator<Item = (usize, usize)> {
    let cols = x.cols();
    (0..x.rows()).flat_map(move |r| (0..cols).map(move |c| (r, c)))
}

fn masked_entries<'a>(x: &DenseMatrix, w: &'a MaskMatrix) -> impl Iterator<Item = (usize, usize)> + 'a {
    all_entries(x).filter(move |&(r, c)| w.is_observed(r, c))
}
