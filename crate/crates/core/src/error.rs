use thiserror::Error;

/// Errors produced by construction, evaluation and integration routines.
///
/// Divergence of a *run* is reported through [`crate::RunRecord`] rather than
/// an `Err`: a blown-up trajectory is data, not a failure of the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Invalid configuration (bad weights, incompatible stepper/policy, ...).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A vector field was evaluated outside the open set it is defined on.
    #[error("state left the problem domain: {0}")]
    DomainExit(String),

    /// An evaluation produced NaN or infinite entries.
    #[error("non-finite value produced during evaluation")]
    NonFinite,

    /// The discrete iteration blew up at the given step (1-based).
    #[error("state diverged at step {step}")]
    DivergedState { step: usize },

    /// The finite-difference Hessian contained non-finite entries.
    #[error("Hessian evaluation produced non-finite entries")]
    HessianEvaluation,

    /// The unity-gain probe run used for Lipschitz estimation diverged.
    #[error("Lipschitz estimation failed: probe diverged at step {step} (partial maximum {partial_max:e})")]
    EstimationFailed { step: usize, partial_max: f64 },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn domain_exit(msg: impl Into<String>) -> Self {
        Error::DomainExit(msg.into())
    }
}
