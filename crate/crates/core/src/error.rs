use alloc::string::String;
use core::fmt;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    Domain(String),
    /// The request exceeds a hard resource cap (sieve limit, table size).
    Resource(String),
    /// A factorization needs primes beyond the available table.
    IncompleteFactorization { k: u64, limit: u64 },
    /// A rejection sampler ran out of budget. Retrying with a fresh stream is safe.
    RejectionBudget { attempts: u32 },
    /// Configuration values that cannot meet the stated accuracy.
    Config(String),
    /// Adaptive quadrature failed to reach its tolerance.
    Numeric(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Resource(msg) => write!(f, "resource error: {msg}"),
            Error::IncompleteFactorization { k, limit } => write!(
                f,
                "incomplete factorization: {k} has a prime factor above the table limit {limit}"
            ),
            Error::RejectionBudget { attempts } => {
                write!(f, "rejection budget exhausted after {attempts} attempts")
            }
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Numeric(msg) => write!(f, "numeric error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
