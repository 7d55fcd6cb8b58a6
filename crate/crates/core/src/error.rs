use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// `φ` is too close to zero for the right-hand side to be evaluated.
    #[error("phi = {phi:e} is below the floor at t = {t}; start from a series expansion instead")]
    SingularPhi { t: f64, phi: f64 },

    #[error("step size control failed at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },

    #[error("no sign change of {what} on [{lo}, {hi}] (values {f_lo:e}, {f_hi:e})")]
    NoBracket {
        what: &'static str,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("boundary verification failed: {0}")]
    InvalidRoot(String),

    #[error("no convergence after {iterations} iterations (mismatch norm {mismatch:e}): {reason}")]
    NoConvergence {
        iterations: usize,
        mismatch: f64,
        reason: String,
    },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
