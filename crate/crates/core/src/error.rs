use thiserror::Error;

/// Errors shared across the solver suite.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("instance generation failed: {0}")]
    Generation(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
