use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad call-site input: shape mismatch, out-of-range index, wrong length.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A size guard (matrix dimension, qubit cap) would be exceeded.
    #[error("resource guard exceeded: {0}")]
    Resource(String),
    /// A result violates the active numeric policy.
    #[error("numeric policy violation: {0}")]
    NumericPolicy(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! arg_err {
    ($($t:tt)*) => { $crate::error::Error::Argument(format!($($t)*)) };
}
pub(crate) use arg_err;
