//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated (shape, range, finiteness).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A matrix required to be Hermitian positive definite is not.
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    /// A matrix required to be positive semidefinite has a significantly
    /// negative eigenvalue.
    #[error("matrix is not positive semidefinite: {0}")]
    NotPsd(String),

    /// The trace-quotient iteration hit its iteration cap. The objective
    /// values observed so far are carried along for diagnostics.
    #[error("trace-quotient iteration did not converge after {} steps (last objective {:?})",
            rho_trace.len(), rho_trace.last())]
    ConvergenceFailure { rho_trace: Vec<f64> },

    /// The effective channel seen by the inner beamformer is rank deficient.
    #[error("effective channel is singular or nearly rank deficient")]
    SingularChannel,

    /// Block diagonalization cannot produce the requested outer dimension:
    /// the interference null space is too small.
    #[error("block diagonalization infeasible: need {needed} null-space dimensions, have {available}")]
    InfeasibleBd { needed: usize, available: usize },

    /// The experiment configuration is inconsistent or unreadable.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for configuration problems, 3 for
    /// solver non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::ConvergenceFailure { .. } => 3,
            _ => 1,
        }
    }
}
