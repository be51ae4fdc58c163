use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sample: at least one atom is required")]
    EmptySample,

    #[error("atom or weight is not finite at position {index}")]
    NonFiniteInput { index: usize },

    #[error("weight {weight} at position {index} is not positive")]
    NonPositiveWeight { weight: f64, index: usize },

    #[error("weights sum to {sum}, outside the renormalization tolerance")]
    WeightSumOutOfTolerance { sum: f64 },

    #[error("degenerate distribution: all mass sits on a single atom")]
    DegenerateDistribution,

    #[error("rank {rank} outside [0, 1]")]
    RankOutOfRange { rank: f64 },

    #[error("score {score} outside [0, 1]")]
    ScoreOutOfRange { score: f64 },

    #[error("group count mismatch: expected {expected}, got {got}")]
    GroupCountMismatch { expected: usize, got: usize },

    #[error("group index {index} out of range for {groups} groups")]
    GroupIndexOutOfRange { index: usize, groups: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("utility denominator {denominator} is outside the measure's domain")]
    OutsideDomain { denominator: f64 },

    #[error("classifier is not demographic-parity fair: positive rates differ by {gap}, allowed {allowed}")]
    NotFair { gap: f64, allowed: f64 },

    #[error("solver did not converge: best objective {best_objective} after {iterations} iterations")]
    NoConvergence {
        best_objective: f64,
        iterations: usize,
    },

    #[error("invalid dual problem: {0}")]
    InvalidDual(String),

    #[error("total variation is zero: the two conditionals coincide")]
    ZeroTotalVariation,

    #[error("invalid joint distribution: {0}")]
    InvalidJoint(String),

    #[error("support too large for enumeration: {size} points exceeds the cap of {cap}")]
    EnumerationTooLarge { size: usize, cap: usize },

    #[error("no deterministic classifier satisfies demographic parity within tolerance {tol}")]
    NoFeasibleClassifier { tol: f64 },

    #[error("malformed input at line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
