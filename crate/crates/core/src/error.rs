use thiserror::Error;

/// Errors raised by the numerical kernels and calculators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("invalid trace {0}")]
    InvalidTrace(f64),

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystem(String),

    #[error("Kraus operators are not trace preserving (max deviation {0:e})")]
    NotTracePreserving(f64),

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("table too large: {0}")]
    TableTooLarge(String),

    #[error("unknown channel family `{0}`")]
    UnknownFamily(String),

    #[error("invariant violated: {0}")]
    InvariantViolated(String),
}

pub type Result<T> = std::result::Result<T, Error>;
