use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("vector is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("columns are linearly dependent (residual norm {0:e})")]
    Degenerate(f64),

    #[error("{name} = {value} is out of range ({allowed})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        allowed: &'static str,
    },

    #[error("invalid machine: {0}")]
    InvalidMachine(String),

    #[error("invalid input set: {0}")]
    InvalidSet(String),

    #[error("index {index} out of range (limit {limit})")]
    Index { index: usize, limit: usize },

    #[error("unknown {what}: {name}")]
    Unknown { what: &'static str, name: String },
}

pub type Result<T> = std::result::Result<T, Error>;
