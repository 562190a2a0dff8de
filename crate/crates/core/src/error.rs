use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
///
/// All indices carried in error values are 1-based.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of bounds for mode {mode} with extent {extent}")]
    Bounds {
        mode: usize,
        index: usize,
        extent: usize,
    },
    #[error("flat index {flat} out of range 1..={len}")]
    FlatBounds { flat: usize, len: usize },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("division by zero at divisor index {index:?}")]
    DivisionByZero { index: Vec<usize> },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("network error: {0}")]
    Network(String),
    #[error("plan error: {0}")]
    Plan(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// True for failures caused by floating-point behaviour rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
