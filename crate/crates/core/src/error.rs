use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("protocol does not support this operation: {0}")]
    Unsupported(String),

    #[error("inconsistent statistics: {0}")]
    InconsistentStatistics(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("missing dual certificate")]
    MissingCertificate,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
