//! Error types shared across the toolkit.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The smallest singular value is below `rank_tol` times the largest.
    #[error("rank deficient: sigma_min/sigma_max = {ratio:.3e} < {tol:.3e}")]
    RankDeficient { ratio: f64, tol: f64 },

    /// Tightening constant must be strictly positive.
    #[error("invalid frame constant c = {0}; must be > 0")]
    InvalidConstant(f64),

    /// A measurement matrix must have fewer rows than columns.
    #[error("bad dimensions: need 0 < n < N, got n = {n}, N = {cols}")]
    BadDimensions { n: usize, cols: usize },

    /// Column normalization hit a zero column.
    #[error("column {0} has zero norm; cannot normalize")]
    ZeroColumn(usize),

    /// Disjoint-support hypothesis construction is impossible.
    #[error("infeasible hypothesis set: m*k = {mk} exceeds N = {cols}")]
    Infeasible { mk: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The separation ratio is 0/0: the signal difference lies in the
    /// null space of the matrix.
    #[error("degenerate difference: Phi*(s1 - s2) = 0")]
    DegenerateDifference,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
