use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DhmError {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition on the inputs does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Two fields that must live on the same chart do not.
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),

    /// The explicit flow produced a non-finite value.
    #[error("flow diverged at iteration {iteration}")]
    Diverged { iteration: usize },

    /// The inner conjugate-gradient solve did not reach its tolerance.
    #[error("linear solve broke down after {iterations} iterations (relative residual {residual:.3e})")]
    LinearSolve { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, DhmError>;
