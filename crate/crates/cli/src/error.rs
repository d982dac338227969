use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}, column {column}: {message}")]
    Config { line: usize, column: usize, message: String },

    #[error("{path}:{line}:{column}: {message}")]
    ConfigFile { path: String, line: usize, column: usize, message: String },

    #[error("unknown preset {0:?}")]
    UnknownPreset(String),

    #[error("{0}")]
    Unsupported(String),

    #[error(transparent)]
    Core(#[from] mdiqkd::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
