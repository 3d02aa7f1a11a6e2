use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] rapidstab::Error),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed system document: {0}")]
    Malformed(String),
    #[error("inconsistent system dimensions: {0}")]
    Dimension(String),
    #[error("non-finite entry in system document: {0}")]
    NonFinite(String),
    #[error("unsupported schema version {0} (expected 1)")]
    Schema(u32),
    #[error("unknown demo system `{0}` (expected oscillator, scalar, string(n[,width]) or skew(n[,seed]))")]
    UnknownDemo(String),
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    CheckFailed(String),
}

pub type Result<T> = std::result::Result<T, CliError>;
