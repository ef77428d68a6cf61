use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semi-definite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("trace is not one (got {0})")]
    TraceNotOne(f64),

    #[error("rank {rank} is out of range for dimension {dim}")]
    BadRank { rank: usize, dim: usize },

    #[error("not a projection-valued measure: {0}")]
    NotPvm(String),

    #[error("bad rank pattern: {0}")]
    BadPattern(String),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("outcome {outcome} has probability {probability:e}")]
    ZeroProbabilityOutcome { outcome: usize, probability: f64 },

    #[error("map is not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),

    #[error("support of the first state is not contained in the support of the second")]
    SupportViolation,

    #[error("marginal mismatch: {0}")]
    MarginalMismatch(String),

    #[error("joint probability {value:e} at {index:?} has a zero-probability marginal outcome")]
    ZeroProbInconsistency { index: Vec<usize>, value: f64 },

    #[error("expected {expected} items, got {got}")]
    CountMismatch { expected: usize, got: usize },

    #[error("inconsistent k-map: {0}")]
    InconsistentKMap(String),

    #[error("bad subsystem partition: {0}")]
    BadPartition(String),

    #[error("marginal on subsystem {0} is rank deficient")]
    SingularMarginal(char),

    #[error("not an interaction Hamiltonian (partial trace norm {0:e})")]
    NotInteraction(f64),

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
