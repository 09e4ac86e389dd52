use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("singular matrix (zero pivot in column {column})")]
    SingularMatrix { column: usize },
    #[error("step size {step:e} fell below the minimum at u = {u}")]
    StepSizeUnderflow { u: f64, step: f64 },
    #[error("non-finite state encountered at u = {u}")]
    NonFinite { u: f64 },
    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("elimination breakdown at n = {n}")]
    EliminationBreakdown { n: usize },
    #[error("continued fraction not converged (change {change:e} at depth {depth})")]
    DepthNotConverged { depth: usize, change: f64 },
    #[error("asymptotic estimate not stabilised (relative change {change:e} at N = {n})")]
    EstimateNotStabilized { n: usize, change: f64 },
    #[error("root not found after {iterations} iterations (last |F| = {residual:e})")]
    NotFound { iterations: usize, residual: f64 },
    #[error("no root in bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("ill-conditioned fit (condition number {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("branch ambiguity: argument {arg} too close to the negative real axis")]
    BranchAmbiguity { arg: f64 },
    #[error("outside the model domain: {0}")]
    ModelDomain(String),
}
