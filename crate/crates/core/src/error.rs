use thiserror::Error;

/// Errors produced anywhere in the analysis / factorization / solve pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsymmetric-input: header does not declare a symmetric matrix")]
    UnsymmetricInput,

    #[error("index-out-of-range: entry ({row}, {col}) outside a {n}x{n} matrix")]
    IndexOutOfRange { row: usize, col: usize, n: usize },

    #[error("not-positive-definite: pivot of column {0} is not positive")]
    NotPositiveDefinite(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("matrix of order {n} exceeds the dense oracle cap of {cap}")]
    OracleCap { n: usize, cap: usize },

    #[error("structural mismatch: {0}")]
    Structure(String),

    #[error("deadlock: wait-for cycle {cycle:?}")]
    Deadlock { cycle: Vec<usize> },

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
