use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid model, distribution or experiment parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument left the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested computation needs a conditional-moment oracle the model
    /// does not provide.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// A path was degenerate (zero denominator, zero residual variance).
    #[error("degenerate path: {0}")]
    DegeneratePath(String),

    /// A sample overflowed the guard and was flagged for exclusion.
    #[error("flagged sample: {0}")]
    Flagged(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    ConfigParse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
