use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration invalid: {0}")]
    ConfigInvalid(String),
    #[error("equal-gap geometry infeasible: gap_sq={gap_sq} must be in [0, {limit}) for T={tasks}")]
    InfeasibleGap { gap_sq: f64, limit: f64, tasks: usize },
    #[error("dimension too small: p={p} < {needed}")]
    DimensionTooSmall { p: usize, needed: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("singular Gram system (condition estimate {cond:e})")]
    SingularGram { cond: f64 },
    #[error("fit residual {residual:e} exceeds tolerance {tol:e}")]
    FitTolerance { residual: f64, tol: f64 },
    #[error("invalid revisit order: {0}")]
    PermutationInvalid(String),
    #[error("invalid buffer partition: {0}")]
    PartitionInvalid(String),
    #[error("forgetting needs at least two tasks")]
    TooFewTasks,
    #[error("memory M={memory} is not divisible by t-1={divisor}")]
    NonIntegerAllocation { memory: usize, divisor: usize },
    #[error("denominator outside its domain: {0}")]
    DenominatorDomain(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("closed form assumes sigma = 0, got {0}")]
    NonzeroSigma(f64),
    #[error("standard error undefined for {0} trial(s); need at least 2")]
    TooFewTrials(usize),
    #[error("{failed} of {trials} trials hit degenerate draws (>1%)")]
    TooManyDegenerateDraws { failed: usize, trials: usize },
}
