use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A size argument exceeded a configured cap.
    #[error("{what} = {value} is out of range (cap {cap_name} = {cap})")]
    Bounds {
        what: &'static str,
        value: usize,
        cap_name: &'static str,
        cap: usize,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Parse failure at a character offset of the input.
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    /// A documented precondition of the callee did not hold.
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A statistic cannot be formed from the data, e.g. a zero standard error
    /// next to a nonzero discrepancy.
    #[error("degenerate sample: {0}")]
    Degenerate(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
