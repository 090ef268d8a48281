use thiserror::Error;

use crate::set::ElementSet;

/// Errors raised by the library layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("element {element} is out of range for a ground set of size {size}")]
    ElementOutOfRange { element: usize, size: usize },

    #[error("element {0} lies outside the matroid's ground set")]
    OutsideGround(usize),

    #[error("weight of element {element} must be non-negative, got {weight}")]
    InvalidWeight { element: usize, weight: f64 },

    #[error("invalid matroid: {0}")]
    InvalidMatroid(String),

    #[error("invalid set function: {0}")]
    InvalidFunction(String),

    #[error("set {0} is not independent")]
    NotIndependent(ElementSet),

    #[error("independent sets have different sizes ({0} and {1})")]
    SizeMismatch(usize, usize),

    #[error("{what} supports at most {limit}, got {size}")]
    TooLarge {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    #[error("invalid linear program: {0}")]
    InvalidProgram(String),

    #[error("simplex did not terminate within {0} pivots")]
    IterationLimit(usize),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("protocol violation at round {round}: {reason}")]
    ProtocolViolation { round: u64, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
