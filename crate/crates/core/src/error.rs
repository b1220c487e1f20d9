use thiserror::Error;

/// Errors produced by the detectors, the harness and the text formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {lhs:?} vs {rhs:?}")]
    DimensionMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },

    #[error("{op} supports only {expected}-column systems, got {cols}")]
    UnsupportedShape {
        op: &'static str,
        expected: usize,
        cols: usize,
    },

    /// The Gram matrix of the normal equations is numerically singular.
    #[error("normal equations are singular (scaled determinant {0:e})")]
    Singular(f64),

    #[error("exhaustive search needs {candidates} candidates, cap is {cap}")]
    EnumerationTooLarge { candidates: u128, cap: u64 },

    #[error("no ILS execution converged after {0} attempts")]
    NoConvergedRun(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
