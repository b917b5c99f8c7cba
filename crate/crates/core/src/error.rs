use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for dataset of size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error(
        "squared distance {radicand:e} below clamp threshold {threshold:e}; \
         kernel matrix appears indefinite"
    )]
    IndefiniteKernel { radicand: f64, threshold: f64 },

    #[error("center list is empty")]
    EmptyCenters,

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("nonpositive degree estimate {value:e} for row {row}; increase the sample size")]
    NonPositiveDegree { row: usize, value: f64 },

    #[error("size guard violated: {0}")]
    SizeGuard(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
