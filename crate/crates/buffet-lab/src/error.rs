use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A model or engine parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A run configuration is incoherent (bad key, bad value, missing seed, ...).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An operation was requested in a regime where it is not defined
    /// (e.g. a CLT pipeline outside its theorem's hypotheses).
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    /// The requested quantity has no meaning in the current state
    /// (e.g. an inclusion probability with no observed dishes).
    #[error("undefined quantity: {0}")]
    Undefined(String),

    /// A statistical routine received an unusable sample.
    #[error("bad sample: {0}")]
    BadSample(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A file produced by this tool could not be parsed back.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
