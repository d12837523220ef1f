use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {message}")]
    InvalidParameter { field: String, message: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular matrix: rank {rank} < {expected}")]
    Singular { rank: usize, expected: usize },

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("divergent quantity: {0}")]
    Divergent(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unbounded body: {infinite} of {total} radial nodes are infinite")]
    Unbounded { infinite: usize, total: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field: field.to_string(),
        message: message.into(),
    }
}
