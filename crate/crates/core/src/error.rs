use thiserror::Error;

/// Errors raised by the rank, estimation and inference routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample `{0}` is empty")]
    EmptySample(String),
    #[error("sample `{label}` has {len} observation(s); at least {min} required")]
    TooSmall { label: String, len: usize, min: usize },
    #[error("non-finite value {value} at position {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The requested quantity is undefined for this data (zero variance or a
    /// boundary effect estimate); the caller should take the fallback path.
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("target value {target} is outside the attainable range [{low}, {high}]")]
    OutOfRange { target: f64, low: f64, high: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
