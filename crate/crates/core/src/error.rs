use thiserror::Error;

/// Errors raised by the library. Each variant maps to a distinct CLI exit class.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("oracle limit exceeded: {0}")]
    OracleLimit(String),

    #[error("capability limit: {0}")]
    Capability(String),

    #[error("invalid group element: {0}")]
    InvalidGroupElement(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("cache format: {0}")]
    CacheFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
