use thiserror::Error;

/// Errors raised across the library.
///
/// The CLI maps `Input` to exit code 1 and `Capacity` to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
