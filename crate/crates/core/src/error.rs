use thiserror::Error;

/// Errors raised by the numerical and denoising routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} = {value} is outside the open interval (0, 1)")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("sequence must not be empty")]
    EmptySequence,

    #[error("invalid spin value {0}, expected -1 or +1")]
    InvalidSpin(i64),

    #[error("enumeration over {len} symbols exceeds the budget of {max}")]
    TooLong { len: usize, max: usize },

    #[error("context of {available} symbols only guarantees error {bound:e}, requested {tol:e}")]
    InsufficientContext {
        available: usize,
        bound: f64,
        tol: f64,
    },

    #[error("continued fraction denominator {value:e} at level {level} is too close to zero")]
    DivisionNearZero { level: usize, value: f64 },

    #[error("channel with crossover probability 1/2 is not invertible")]
    SingularChannel,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("sequence of length {len} is too short, need at least {min}")]
    SequenceTooShort { len: usize, min: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
