//! Dense matrix plumbing shared by the other modules.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::{Result, RkltError};

/// Dense real matrix, row-major semantics for indexing `(row, col)`.
pub type RealMatrix = DMatrix<f64>;

pub(crate) fn ensure_square(m: &RealMatrix, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(RkltError::DimensionMismatch {
            expected: format!("{n}x{n}"),
            got: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(())
}

/// Largest absolute entry.
pub fn max_abs(m: &RealMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Largest absolute off-diagonal entry.
pub fn max_abs_off_diagonal(m: &RealMatrix) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                worst = worst.max(m[(i, j)].abs());
            }
        }
    }
    worst
}

/// Inverse via LU, rejecting numerically singular input.
pub fn invert(m: &RealMatrix) -> Result<RealMatrix> {
    if m.nrows() != m.ncols() {
        return Err(RkltError::DimensionMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    let scale = max_abs(m).max(f64::MIN_POSITIVE);
    let lu = m.clone().lu();
    let det = lu.determinant();
    // relative determinant check; the matrices here are at most 16x16
    if !det.is_finite() || det.abs() <= 1e-12 * scale.powi(m.nrows() as i32) {
        return Err(RkltError::SingularTransform);
    }
    lu.try_inverse().ok_or(RkltError::SingularTransform)
}

/// Serialize as CSV: one line per row, full round-trip precision, `.` decimal separator.
pub fn to_csv(m: &RealMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", m[(i, j)]);
        }
        out.push('\n');
    }
    out
}
