use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("degenerate endpoint: {0}")]
    DegenerateEndpoint(String),

    #[error("matrix is numerically singular: {0}")]
    NearSingular(String),

    #[error("invalid coefficient path: {0}")]
    InvalidCoefficient(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("winding {value} is {defect:.3e} away from an integer (grid too coarse?)")]
    IntegralityDefect { value: f64, defect: f64 },

    #[error("no perturbation in the schedule produced a stable nondegenerate index")]
    PerturbationFailure,

    #[error("relative Morse index changed under truncation doubling: m={m} gives {at_m}, 2m gives {at_2m}")]
    UnstableTruncation { m: usize, at_m: i64, at_2m: i64 },

    #[error("boundary violation: {0}")]
    BoundaryViolation(String),

    #[error("Newton iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("every seed failed to converge")]
    AllSeedsFailed,

    #[error("eigenvalue counts disagree with the index pair: {0}")]
    CountMismatch(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
