use thiserror::Error;

/// Failures of the machine/network model and of the equilibrium search.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("stator/network system is singular (|det| = {det:e})")]
    SingularNetwork { det: f64 },
    #[error(
        "own admittance at the generator terminals is degenerate (g1^2 + b1^2 = {magnitude:e})"
    )]
    DegenerateOwnAdmittance { magnitude: f64 },
    #[error(
        "equilibrium search did not converge (residual {residual:e} after {iterations} iterations)"
    )]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("equilibrium Jacobian is singular")]
    SingularJacobian,
    #[error("operating point target rejected: {0}")]
    InvalidTarget(String),
}

/// A configuration value violates one of its invariants. The message names
/// the first violated invariant, e.g. `tuner: beta < alpha`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct ValidationError(pub String);

impl ValidationError {
    pub(crate) fn new(msg: impl Into<String>) -> Self {
        ValidationError(msg.into())
    }
}

/// Returns `Err` with `msg` unless `cond` holds.
pub(crate) fn ensure(cond: bool, msg: &str) -> Result<(), ValidationError> {
    if cond {
        Ok(())
    } else {
        Err(ValidationError::new(msg))
    }
}
