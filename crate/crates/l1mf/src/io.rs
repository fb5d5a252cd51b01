//! CSV matrices and masks.
//!
//! Matrices are plain comma-separated reals, one row per line, no header.
//! The case-insensitive token `nan` marks a missing entry; it reads back as
//! value `0.0` with mask bit `0`. Masks are the same grammar with `0`/`1`
//! fields. Values are written in Rust's shortest round-trip form, so a
//! write followed by a read reproduces every bit (including `-0.0`).

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use l1mf_core::{DenseMatrix, MaskMatrix};

use crate::error::{csv_error, Error, Result};

const MISSING: &str = "nan";

/// Reads a matrix, turning `nan` cells into masked zeros.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<(DenseMatrix, MaskMatrix)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(file, path)
}

/// Reads a matrix and combines its `nan` mask with an explicit mask file.
/// An entry is observed only when both agree it is.
pub fn read_matrix_with_mask(path: impl AsRef<Path>, mask_path: impl AsRef<Path>) -> Result<(DenseMatrix, MaskMatrix)> {
    let (x, nan_mask) = read_matrix(path)?;
    let explicit = read_mask(mask_path)?;
    if explicit.shape() != x.shape() {
        return Err(Error::ShapeMismatch { what: "matrix", left: x.shape(), other: "mask", right: explicit.shape() });
    }
    let mask = nan_mask.and(&explicit)?;
    Ok((x, mask))
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<MaskMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_mask(file, path)
}

/// Parses matrix CSV from any reader; `path` only labels error messages.
pub fn parse_matrix<R: Read>(reader: R, path: &Path) -> Result<(DenseMatrix, MaskMatrix)> {
    let table = read_table(reader, path, |field| {
        if field.eq_ignore_ascii_case(MISSING) {
            return Ok((0.0, 0));
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok((v, 1)),
            Ok(_) => Err(format!("non-finite value '{field}'")),
            Err(_) => Err(format!("cannot parse '{field}' as a number")),
        }
    })?;
    let (values, bits): (Vec<f64>, Vec<u8>) = table.cells.into_iter().unzip();
    let x = DenseMatrix::from_vec(table.rows, table.cols, values)?;
    let w = MaskMatrix::from_vec(table.rows, table.cols, bits)?;
    Ok((x, w))
}

pub fn parse_mask<R: Read>(reader: R, path: &Path) -> Result<MaskMatrix> {
    let table = read_table(reader, path, |field| match field {
        "0" => Ok(0u8),
        "1" => Ok(1u8),
        _ => Err(format!("mask entries must be 0 or 1, found '{field}'")),
    })?;
    Ok(MaskMatrix::from_vec(table.rows, table.cols, table.cells)?)
}

struct Table<T> {
    rows: usize,
    cols: usize,
    cells: Vec<T>,
}

fn read_table<R: Read, T>(
    reader: R,
    path: &Path,
    mut parse: impl FnMut(&str) -> std::result::Result<T, String>,
) -> Result<Table<T>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);

    let mut cells = Vec::new();
    let mut rows = 0;
    let mut cols = 0;
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => return Err(csv_error(path, e)),
        }
        let line = record.position().map_or(rows as u64 + 1, |p| p.line());
        if rows == 0 {
            cols = record.len();
        } else if record.len() != cols {
            return Err(Error::Ragged { path: path.to_path_buf(), line, expected: cols, found: record.len() });
        }
        for (j, field) in record.iter().enumerate() {
            let value = parse(field).map_err(|msg| Error::Parse { path: path.to_path_buf(), line, col: j + 1, msg })?;
            cells.push(value);
        }
        rows += 1;
    }
    if rows == 0 || cols == 0 {
        return Err(Error::invalid(format!("{}: no data", path.display())));
    }
    Ok(Table { rows, cols, cells })
}

/// Writes `m` as CSV. Cells where `w` is `0` are written as `nan`.
pub fn write_matrix(m: &DenseMatrix, w: Option<&MaskMatrix>, path: impl AsRef<Path>) -> Result<()> {
    if let Some(w) = w {
        if w.shape() != m.shape() {
            return Err(Error::ShapeMismatch { what: "matrix", left: m.shape(), other: "mask", right: w.shape() });
        }
    }
    let mut out = String::with_capacity(m.rows() * m.cols() * 20);
    for i in 0..m.rows() {
        for (j, v) in m.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            if w.is_some_and(|w| !w.is_observed(i, j)) {
                out.push_str(MISSING);
            } else {
                write!(out, "{v:?}").unwrap();
            }
        }
        out.push('\n');
    }
    write_file(path.as_ref(), out.as_bytes())
}

pub fn write_mask(w: &MaskMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::with_capacity(w.rows() * w.cols() * 2);
    for i in 0..w.rows() {
        for (j, b) in w.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push(if *b == 1 { '1' } else { '0' });
        }
        out.push('\n');
    }
    write_file(path.as_ref(), out.as_bytes())
}

/// Writes a per-sweep objective trace with a `sweep,objective` header.
pub fn write_trace(trace: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("sweep,objective\n");
    for (s, f) in trace.iter().enumerate() {
        writeln!(out, "{},{f:?}", s + 1).unwrap();
    }
    write_file(path.as_ref(), out.as_bytes())
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}
