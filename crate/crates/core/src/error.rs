use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two fields or grids of different sizes were combined.
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    /// A pointwise map produced a non-finite value.
    #[error("non-finite value {value} from `{map}` at collocation point {index} (xi = {xi})")]
    Evaluation { map: &'static str, index: usize, xi: f64, value: f64 },

    /// The model does not have the structure an operation requires.
    #[error("model `{model}` is not supported here: {reason}")]
    UnsupportedModel { model: String, reason: String },

    /// Not enough usable rows to fit a convergence order.
    #[error("insufficient data: {usable} usable rows, at least {required} required")]
    InsufficientData { usable: usize, required: usize },

    /// A trajectory left the finite range.
    #[error("numerical blow-up: {0}")]
    BlowUp(String),

    /// Output could not be written.
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
