use thiserror::Error;

/// Unified error type for the whole library.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix dimensions do not match what the operation requires.
    #[error("shape error: {0}")]
    Shape(String),

    /// An input value is outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input object fails a structural validity check (non-Hermitian
    /// density matrix, non-trace-preserving channel, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A numerical guarantee was violated beyond the allowed clamp window.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A configurable resource limit would be exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// I/O failure, annotated with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// JSON (de)serialization failure.
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
