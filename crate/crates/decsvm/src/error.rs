use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum DecsvmError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("graph error: {0}")]
    Graph(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, DecsvmError>;
