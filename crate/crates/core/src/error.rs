use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DecayError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The result is not representable in double precision.
    #[error("range error: {0}")]
    Range(String),

    #[error("root search from seed {seed} failed: {reason}")]
    SearchFailure { seed: Complex64, reason: String },

    #[error("not converged: {0}")]
    Convergence(String),

    /// Inconsistent parameters, or a numerical setup that cannot meet its
    /// accuracy contract.
    #[error("configuration error: {0}")]
    Configuration(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DecayError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(DecayError::Domain(msg.into()))
}
