use thiserror::Error;

/// Errors produced by model construction, formulation and solving.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("duplicate index {0}")]
    DuplicateIndex(usize),

    #[error("formulation error: {0}")]
    Formulation(String),

    #[error("model has {n} variables but annealer capacity is {capacity}")]
    CapacityExceeded { n: usize, capacity: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("problem of size {n} exceeds the limit of {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("arithmetic overflow: {0}")]
    Overflow(String),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
