use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] faraday_ecp_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("malformed transcript line: {0}")]
    Transcript(String),
}

pub type Result<T> = std::result::Result<T, Error>;
