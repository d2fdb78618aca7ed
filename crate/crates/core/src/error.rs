use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-domain input (non-finite values, bad flags, bad shapes).
    #[error("input error: {0}")]
    Input(String),

    #[error("matrix not square: {rows} rows, row {row} has {cols} columns")]
    NotSquare { rows: usize, row: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix not positive definite (pivot {pivot} = {value})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    /// S_ii + lambda <= 0 for some i, so no positive definite W exists.
    #[error("infeasible problem: S[{index}][{index}] + lambda = {value} <= 0")]
    Infeasible { index: usize, value: f64 },

    #[error("synthetic generator failed after {attempts} seeds: {reason}")]
    Degenerate { attempts: usize, reason: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
