use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{what} needs {need} but the cap is {cap}")]
    CapExceeded { what: &'static str, need: u128, cap: u128 },

    #[error("decoding radius {radius} is not below the guaranteed bound {bound:.3}")]
    RadiusRefused { radius: usize, bound: f64 },

    #[error("operation requires an explicit oracle table")]
    LazyOracle,

    #[error("query budget of {0} exhausted")]
    BudgetExhausted(u64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }
}
