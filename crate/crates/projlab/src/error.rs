//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("basis is rank deficient: {vectors} vectors span only rank {rank}")]
    RankDeficientBasis { vectors: usize, rank: usize },

    #[error("range and kernel are not complementary (smallest/largest singular value {ratio:.3e})")]
    NonComplementary { ratio: f64 },

    #[error("operator is not idempotent: residual {residual:.3e}")]
    NotIdempotent { residual: f64 },

    #[error(
        "pair projector for ({j1},{j2}) violates compatibility: residual_left {left:.3e}, residual_right {right:.3e}"
    )]
    CompatibilityViolation {
        j1: usize,
        j2: usize,
        left: f64,
        right: f64,
    },

    #[error("consistency violated for subset {subset:?}: residual {residual:.3e} at projector {index}")]
    ConsistencyViolation {
        subset: Vec<usize>,
        index: usize,
        residual: f64,
    },

    #[error("operation requires the Euclidean norm (p = 2, unit weights)")]
    HilbertOnly,

    #[error("no pair projector for ({j1},{j2}); build or supply one first")]
    MissingPairProjector { j1: usize, j2: usize },

    #[error("cosine {cos} is not below 1; criterion inapplicable")]
    CosineNotBelowOne { cos: f64 },

    #[error("beta = {beta} out of range: need 0 <= beta < {limit}")]
    BetaOutOfRange { beta: f64, limit: f64 },

    #[error("invalid probability vector: {0}")]
    InvalidMeasure(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("per-block factor {factor} >= 1; envelope is not contractive")]
    NonContractiveEnvelope { factor: f64 },

    #[error("quasi-period violated: window starting at index {window_start} does not cover every projector")]
    QuasiPeriodViolation { window_start: usize },

    #[error("schedule needs {needed} indices but only {available} were provided")]
    ScheduleTooShort { needed: usize, available: usize },

    #[error("iteration did not converge within {budget} steps (last delta {last_delta:.3e})")]
    NonConvergent { budget: usize, last_delta: f64 },

    #[error("product diverged at step {step}: norm {norm:.3e} exceeds the stability bound")]
    Divergence { step: usize, norm: f64 },

    #[error("scenario validation failed on field `{field}`: {message}")]
    ScenarioValidation { field: String, message: String },

    #[error("scenario parse error: {0}")]
    ScenarioParse(String),

    #[error("schedule is required for this command but the scenario has none")]
    MissingSchedule,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the command-line front end reports for this error.
    /// Divergence is distinguished so callers can tell an unstable product
    /// from an ordinary failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Divergence { .. } => 3,
            _ => 1,
        }
    }
}
