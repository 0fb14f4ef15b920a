use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A serialized artifact is malformed.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },
    /// The source model has no closed-form finite-dimensional marginals.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    /// An enumeration or allocation would exceed the configured guard.
    #[error("resource limit: {0}")]
    Resource(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn format(offset: u64, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
