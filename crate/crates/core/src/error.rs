use thiserror::Error;

/// Errors surfaced by every layer of the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The exhaustive enumeration would exceed the configured element cap.
    #[error("enumeration of {elements} elements for S_{m} exceeds the cap of {cap}")]
    Budget { m: u32, elements: u128, cap: u128 },

    /// A valuation reached the guard band of the working precision.
    #[error("precision insufficient: {0}")]
    Precision(String),

    /// The truncated nuclear matrix cannot certify the requested coefficient.
    #[error("truncation insufficient: {0}")]
    Truncation(String),

    /// A quantity that must be integral was not; signals an upstream bug.
    #[error("integrality failure: {0}")]
    Integrality(String),

    #[error("Hensel lifting failed: {0}")]
    Hensel(String),

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
