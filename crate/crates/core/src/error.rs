use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid is not strictly increasing at index {index}")]
    NonIncreasingGrid { index: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },

    #[error("at least 2 curves are required, got {0}")]
    TooFewCurves(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite even with jitter {jitter:e}")]
    NotPositiveDefinite { jitter: f64 },

    #[error("{transform}: domain guard violated at grid index {index} (s = {s})")]
    DomainGuardViolation { transform: String, index: usize, s: f64 },

    #[error("sample size {n} too small, need at least {min}")]
    SampleTooSmall { n: usize, min: usize },

    #[error("standard error is zero at grid index {index}")]
    ZeroSe { index: usize },

    #[error("delta residuals are identically zero")]
    DegenerateResiduals,

    #[error("no root of the expected Euler characteristic equation for alpha = {alpha}")]
    NoRoot { alpha: f64 },

    #[error("Hermite degree {0} out of range 0..=10")]
    DegreeOutOfRange(usize),

    #[error("{0} is not available in closed form")]
    NotAvailable(String),

    #[error("unsupported moment order {0}")]
    UnsupportedOrder(u32),

    #[error("config error: {0}")]
    Config(String),
}
