use thiserror::Error;

/// Errors produced by the ranking primitives and samplers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("{what} of size {size} exceeds the supported limit of {limit}")]
    Capacity {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("index {index} out of range for {len} items")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("empty support: {0}")]
    EmptySupport(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("divergence: {0}")]
    Divergence(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
