use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Row-major `rows × cols` matrix of finite `f64` values.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        check_dims(rows, cols)?;
        Ok(Self { rows, cols, data: vec![0.0; rows * cols] })
    }

    /// Wraps row-major `data`. Every entry must be finite.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(rows, cols)?;
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch { left: data.len(), right: rows * cols });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: pos / cols, col: pos % cols });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::LengthMismatch { left: r.len(), right: cols });
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        check_dims(rows, cols)?;
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self::from_vec(rows, cols, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub(crate) fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    #[inline]
    pub(crate) fn row_mut(&mut self, row: usize) -> &mut [f64] {
        &mut self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn frob_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|x| x * x).sum())
    }

    /// Sum of absolute entries.
    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).sum()
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix { rows: self.cols, cols: self.rows, data: vec![0.0; self.data.len()] };
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

/// Binary observation indicator: 1 = observed, 0 = missing.
#[derive(Clone, PartialEq, Eq)]
pub struct MaskMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<u8>,
}

impl MaskMatrix {
    pub fn ones(rows: usize, cols: usize) -> Result<Self> {
        check_dims(rows, cols)?;
        Ok(Self { rows, cols, bits: vec![1; rows * cols] })
    }

    pub fn from_vec(rows: usize, cols: usize, bits: Vec<u8>) -> Result<Self> {
        check_dims(rows, cols)?;
        if bits.len() != rows * cols {
            return Err(Error::LengthMismatch { left: bits.len(), right: rows * cols });
        }
        if let Some(index) = bits.iter().position(|&b| b > 1) {
            return Err(Error::NonBinaryMask { index, value: bits[index] });
        }
        Ok(Self { rows, cols, bits })
    }

    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut bits = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::LengthMismatch { left: r.len(), right: cols });
            }
            bits.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), cols, bits)
    }

    /// Builds a mask from `f(row, col)`; any nonzero return marks the entry observed.
    pub fn from_fn_bits(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        check_dims(rows, cols)?;
        let bits = (0..rows * cols).map(|i| (f(i / cols, i % cols) != 0) as u8).collect();
        Ok(Self { rows, cols, bits })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn bit(&self, row: usize, col: usize) -> u8 {
        self.bits[row * self.cols + col]
    }

    #[inline]
    pub fn is_observed(&self, row: usize, col: usize) -> bool {
        self.bit(row, col) == 1
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[u8] {
        &self.bits[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    pub fn observed_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn is_all_ones(&self) -> bool {
        self.bits.iter().all(|&b| b == 1)
    }

    pub(crate) fn clear(&mut self, row: usize, col: usize) {
        self.bits[row * self.cols + col] = 0;
    }

    /// Entrywise AND with another mask of the same shape.
    pub fn and(&self, other: &MaskMatrix) -> Result<MaskMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::shape("mask", self.shape(), other.shape()));
        }
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| a & b).collect();
        Ok(MaskMatrix { rows: self.rows, cols: self.cols, bits })
    }

    pub(crate) fn check_pairs_with(&self, x: &DenseMatrix) -> Result<()> {
        if self.shape() == x.shape() {
            Ok(())
        } else {
            Err(Error::shape("mask vs matrix", self.shape(), x.shape()))
        }
    }
}

impl fmt::Debug for MaskMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MaskMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

/// Low-rank factors `U` (d × k) and `V` (n × k) of `X ≈ U·Vᵀ`.
#[derive(Clone, PartialEq, Debug)]
pub struct FactorPair {
    u: DenseMatrix,
    v: DenseMatrix,
}

impl FactorPair {
    pub fn new(u: DenseMatrix, v: DenseMatrix) -> Result<Self> {
        if u.cols() != v.cols() {
            return Err(Error::invalid(alloc::format!(
                "factor ranks differ: U has {} columns, V has {}",
                u.cols(),
                v.cols()
            )));
        }
        let max = u.rows().min(v.rows());
        if u.cols() > max {
            return Err(Error::RankTooLarge { rank: u.cols(), max });
        }
        Ok(Self { u, v })
    }

    pub fn zeros(d: usize, n: usize, rank: usize) -> Result<Self> {
        Self::new(DenseMatrix::zeros(d, rank)?, DenseMatrix::zeros(n, rank)?)
    }

    /// Assembles factors from per-component vectors `u_i` (length d) and `v_i` (length n).
    pub(crate) fn from_components(us: &[Vec<f64>], vs: &[Vec<f64>]) -> Result<Self> {
        let k = us.len();
        let d = us[0].len();
        let n = vs[0].len();
        let u = DenseMatrix::from_fn(d, k, |r, c| us[c][r])?;
        let v = DenseMatrix::from_fn(n, k, |r, c| vs[c][r])?;
        Self::new(u, v)
    }

    pub(crate) fn components(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let k = self.rank();
        let us = (0..k).map(|i| self.u.column(i)).collect();
        let vs = (0..k).map(|i| self.v.column(i)).collect();
        (us, vs)
    }

    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn v(&self) -> &DenseMatrix {
        &self.v
    }

    pub fn rank(&self) -> usize {
        self.u.cols()
    }

    /// Shape `(d, n)` of the product `U·Vᵀ`.
    pub fn product_shape(&self) -> (usize, usize) {
        (self.u.rows(), self.v.rows())
    }

    #[inline]
    pub fn product_entry(&self, row: usize, col: usize) -> f64 {
        let ur = self.u.row(row);
        let vr = self.v.row(col);
        ur.iter().zip(vr).map(|(a, b)| a * b).sum()
    }

    pub fn product(&self) -> DenseMatrix {
        let (d, n) = self.product_shape();
        let mut out = DenseMatrix { rows: d, cols: n, data: vec![0.0; d * n] };
        for r in 0..d {
            for c in 0..n {
                out.set(r, c, self.product_entry(r, c));
            }
        }
        out
    }

    pub(crate) fn check_product_matches(&self, x: &DenseMatrix) -> Result<()> {
        if self.product_shape() == x.shape() {
            Ok(())
        } else {
            Err(Error::shape("factor product vs matrix", self.product_shape(), x.shape()))
        }
    }
}

fn check_dims(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        Err(Error::invalid(alloc::format!("matrix dimensions must be positive, got {rows}x{cols}")))
    } else {
        Ok(())
    }
}
