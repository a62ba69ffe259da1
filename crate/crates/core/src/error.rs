use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("value at index {index} is not a finite number")]
    NonFiniteValue { index: usize },

    #[error("index {index} out of range for sequence of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("input of length {len} exceeds the brute-force cap of {cap}")]
    CapExceeded { len: usize, cap: usize },

    #[error("deletion set covers every index, no surviving value to copy")]
    NoSurvivingIndex,

    #[error("region contains no sampled points")]
    EmptyRegion,

    #[error("no {k}-cell placement of the pattern among marked cells")]
    NoPlacement { k: usize },

    #[error("query budget of {budget} exhausted")]
    BudgetExceeded { budget: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
