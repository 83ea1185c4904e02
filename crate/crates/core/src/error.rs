use thiserror::Error;

/// Errors raised by the numerical routines and their front ends.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point lies outside the disk where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// A formal-series operation was called on an input violating its precondition.
    #[error("precondition violated: {0}")]
    Precond(String),
    /// Intermediate values left the double-precision range.
    #[error("floating-point overflow: {0}")]
    Overflow(String),
    /// Requested size exceeds a hard guard.
    #[error("size error: {0}")]
    Size(String),
    #[error("index error: {0}")]
    Index(String),
    /// Invalid configuration (family, truncation target, grid, ...).
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
