use thiserror::Error;

/// Errors raised by model construction, sampling and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate range: {0}")]
    DegenerateRange(String),

    #[error("model cannot be fitted: {0}")]
    Unfittable(String),

    #[error("numerical fault: {0}")]
    Numerical(String),

    #[error("row {row}, column \"{column}\": {message}")]
    Ingest {
        row: usize,
        column: String,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
