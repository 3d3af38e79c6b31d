use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the domain of the operation (label range,
    /// instance norm, dimension mismatch).
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    /// A pruning, log or tree does not fit together.
    #[error("structural error: {0}")]
    Structural(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("pruning enumeration refused: {count} prunings exceed cap {cap}")]
    CapExceeded { count: u128, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}
