use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("space too large to enumerate: {size} states exceeds cap {cap}")]
    SpaceTooLarge { size: u128, cap: u128 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("not a probability vector: {0}")]
    NotNormalized(String),

    #[error("family is undefined: {0}")]
    UndefinedFamily(String),

    #[error("parameter {0:?} outside the declared domain")]
    OutOfDomain(Vec<f64>),

    #[error("trajectory is empty")]
    EmptyTrajectory,

    #[error("not a Markovian exponential family: {0}")]
    NotMef(String),

    #[error("not permutation uniform: {0}")]
    NotPuniform(String),

    #[error("enumeration cap exceeded: {count} outcomes exceeds cap {cap}")]
    CapExceeded { count: u128, cap: u128 },

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        last: Vec<f64>,
    },

    #[error("precondition not met: {0}")]
    Precondition(String),

    /// A proven implication failed on concrete inputs. This is a bug
    /// in the inputs' construction or in this library, never a user error.
    #[error("invariant violated: {0}")]
    InvariantViolated(String),

    #[error("serialization: {0}")]
    Serde(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
