//! Plain-text matrix/vector formats and the sweep CSV schema.
//!
//! Matrices: first line `n N`, then n rows of N space-separated decimals.
//! Values are printed with 17 significant digits so a write/read cycle is
//! bit-faithful. Vectors use the same format with header `1 N`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::frames::MeasurementMatrix;

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let mut parts = line.split_whitespace();
    let n = parts
        .next()
        .ok_or_else(|| Error::Parse("empty header line".into()))?;
    let cols = parts
        .next()
        .ok_or_else(|| Error::Parse("header needs two integers `n N`".into()))?;
    if parts.next().is_some() {
        return Err(Error::Parse("header has more than two fields".into()));
    }
    let n = n
        .parse::<usize>()
        .map_err(|e| Error::Parse(format!("bad row count {n:?}: {e}")))?;
    let cols = cols
        .parse::<usize>()
        .map_err(|e| Error::Parse(format!("bad column count {cols:?}: {e}")))?;
    Ok((n, cols))
}

fn parse_dense(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))?;
    let (n, cols) = parse_header(header)?;
    let mut entries = Vec::with_capacity(n * cols);
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {n} rows, got {i}")))?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad value {t:?} in row {i}: {e}")))
            })
            .collect::<Result<_>>()?;
        if row.len() != cols {
            return Err(Error::Parse(format!(
                "row {i} has {} values, expected {cols}",
                row.len()
            )));
        }
        entries.extend(row);
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(Error::Parse(format!("trailing data after {n} rows")));
    }
    Ok(DMatrix::from_row_slice(n, cols, &entries))
}

fn format_dense(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{:.16e}", m[(i, j)]);
        }
        out.push('\n');
    }
    out
}

pub fn read_matrix(path: &Path) -> Result<MeasurementMatrix> {
    MeasurementMatrix::new(parse_dense(&fs::read_to_string(path)?)?)
}

pub fn write_matrix(path: &Path, m: &MeasurementMatrix) -> Result<()> {
    fs::write(path, format_dense(m.entries()))?;
    Ok(())
}

/// Reads a vector stored in the matrix format with header `1 N`.
pub fn read_vector(path: &Path) -> Result<DVector<f64>> {
    let dense = parse_dense(&fs::read_to_string(path)?)?;
    if dense.nrows() != 1 {
        return Err(Error::Parse(format!(
            "expected a `1 N` vector file, got {} rows",
            dense.nrows()
        )));
    }
    Ok(dense.row(0).transpose())
}

pub fn write_vector(path: &Path, v: &DVector<f64>) -> Result<()> {
    fs::write(path, format_dense(&DMatrix::from_rows(&[v.transpose()])))?;
    Ok(())
}

/// Formats a float with 10 significant digits for CSV output.
pub fn fmt_sig10(x: f64) -> String {
    format!("{x:.9e}")
}
