use thiserror::Error;

/// Errors produced by the measure, optimization, and testing routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("negative weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("non-finite weight at index {index}")]
    NonFiniteWeight { index: usize },

    #[error("all weights are zero")]
    ZeroMass,

    #[error("empty alphabet")]
    EmptyAlphabet,

    #[error("entries sum to {sum}, outside the accepted normalization window")]
    NotNormalized { sum: f64 },

    #[error("alphabet mismatch: {left} vs {right} symbols")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid order {0}: finite orders must be positive and different from 1")]
    InvalidOrder(f64),

    #[error("operation requires a finite order, got {0}")]
    UnsupportedOrder(String),

    #[error("indeterminate extended-real form: {0}")]
    IndeterminateForm(&'static str),

    #[error("weight vector is not a probability vector: {0}")]
    WeightMismatch(String),

    #[error("value is +inf: {0}")]
    InfiniteValue(&'static str),

    #[error("objective is unbounded below: {0}")]
    Unbounded(&'static str),

    #[error("tilting normalizer is zero")]
    DegenerateTilting,

    #[error("merged pair has a zero-mass side; the split entropy is zero")]
    DegenerateSplit,

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("Kraft sum {kraft} exceeds 1")]
    KraftViolation { kraft: f64 },

    #[error("type denominator {found} does not match block length {expected}")]
    DenominatorMismatch { expected: u64, found: u64 },

    #[error("alpha {alpha} outside (0, {max}]")]
    AlphaOutOfRange { alpha: f64, max: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} did not converge after {iterations} iterations (gap {gap:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        gap: f64,
    },

    #[error("two evaluation routes disagree: {0}")]
    RouteMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by an optimizer failing to certify its result.
    pub fn is_non_convergence(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
