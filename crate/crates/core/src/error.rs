use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported derivative order {order} (maximum {max})")]
    UnsupportedOrder { order: usize, max: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("kernel is singular at the origin and requires a positive mollification")]
    RequiresMollification,
    #[error("wrong dimension: expected {expected}, got {got}")]
    WrongDimension { expected: usize, got: usize },
    #[error("problem too large: {size} exceeds cap {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("degraded accuracy at t = {time}: negative mass {negative_mass:.3e}")]
    DegradedAccuracy { time: f64, negative_mass: f64 },
    #[error(
        "no contraction: ratio >= 1 for {streak} consecutive iterations (last {last_ratio:.3}); \
         increase lambda or shorten the horizon"
    )]
    NoContraction { streak: usize, last_ratio: f64 },
    #[error("non-finite value at step {step}, t = {time}")]
    NonFinite { step: usize, time: f64 },
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
