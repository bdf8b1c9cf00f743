use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain size {0}: a domain needs at least 2 labels")]
    InvalidDomain(usize),

    #[error("label {label} out of range for a domain of size {d}")]
    LabelOutOfRange { label: usize, d: usize },

    #[error("index {index} out of range (only {count} items)")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("resource cap exceeded: {what} requires {required}, cap is {cap}")]
    CapExceeded {
        what: String,
        required: String,
        cap: u64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("improper weighting: negative weight on non-projection(s) {0}")]
    Improper(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("certificate verification failed: {0}")]
    Verification(String),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
