//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by the DSAR library.
#[derive(Debug, Error)]
pub enum DsarError {
    /// A caller-supplied argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A numerical procedure failed to converge or produced non-finite values.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A file did not conform to one of the on-disk formats.
    #[error("format error: {0}")]
    Format(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DsarError>;

impl DsarError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        DsarError::InvalidArgument(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        DsarError::Numerical(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        DsarError::Format(msg.into())
    }
}
