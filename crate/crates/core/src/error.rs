use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a special function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// A model or operation parameter is invalid.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The hypergeometric function diverges at unit argument.
    #[error("2F1({alpha}, {beta}; {gamma}; 1) diverges (gamma - alpha - beta <= 0)")]
    Divergent { alpha: f64, beta: f64, gamma: f64 },

    /// `R w = rho w - 1_{p=1}` has no positive solution at this `rho`.
    #[error("no positive minimal solution at rho - 1 = {eps:e}: {reason}")]
    NotTransient { eps: f64, reason: String },

    /// The requested quantity is undefined in this phase.
    #[error("regime error: {0}")]
    Regime(String),

    /// An iterative procedure did not converge.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// A walk-to-potential construction violates the `b_n -> 1` constraint.
    #[error("constraint violation: {0}")]
    Constraint(String),

    /// Exhaustive enumeration would exceed the configured limits.
    #[error("resource limit: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
