use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("covariance is not positive semidefinite: eigenvalue {index} is {value:e}")]
    NotPositiveSemidefinite { index: usize, value: f64 },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("code `{0}` has no constructive codec")]
    NoCodec(String),

    #[error("helper data rejected: {0}")]
    HelperMismatch(String),

    #[error("fixed-point overflow: {value} does not fit in {width} bits")]
    Overflow { value: i64, width: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
