//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by meshing, assembly, solvers and the study drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("matrix is numerically singular (pivot {pivot} of {size})")]
    Singular { pivot: usize, size: usize },

    #[error("matrix is not symmetric positive definite (pivot {pivot} of {size})")]
    NotSpd { pivot: usize, size: usize },

    #[error("local Robin operator of subdomain {subdomain} could not be factorized: {source}")]
    LocalFactorization {
        subdomain: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error in `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
