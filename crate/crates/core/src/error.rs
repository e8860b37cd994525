use alloc::string::String;

/// Errors raised by the kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("scale {scale} outside domain (0, {max}]")]
    Domain { scale: String, max: String },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("invalid checkpoint sequence: {0}")]
    Checkpoints(String),
    #[error("invalid scale grid: {0}")]
    Grid(String),
    #[error("budget exceeded: {what} needs {needed}, budget is {budget}")]
    Budget { what: &'static str, needed: u128, budget: u128 },
    #[error("empty intersection")]
    Empty,
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Whether this error reports an exhausted resource budget.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget { .. })
    }
}
