use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed container: {0}")]
    Format(String),

    #[error("invalid sample data: {0}")]
    Data(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("measure undefined: {0}")]
    UndefinedMeasure(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The average measure at zero offset does not exceed the threshold, so the
    /// threshold set has no connected component around zero.
    #[error("threshold {threshold} is not exceeded at zero offset (avg {value})")]
    DegenerateThreshold { threshold: f64, value: f64 },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn insufficient(msg: impl Into<String>) -> Self {
        Error::InsufficientData(msg.into())
    }

    pub(crate) fn undefined(msg: impl Into<String>) -> Self {
        Error::UndefinedMeasure(msg.into())
    }
}
