//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("evaluator failed: {0}")]
    EvaluationFailure(String),

    #[error("point is not an equilibrium: |f(x)| = {residual:e}")]
    NotAnEquilibrium { residual: f64 },

    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("step size underflow at t = {t:e}")]
    StepSizeUnderflow { t: f64 },

    #[error("state left the finite range at t = {t:e}")]
    NonFiniteState { t: f64 },

    #[error("two-sided shooting mismatch at t = 0: angle {angle:e} rad exceeds {tol:e}")]
    MatchFailure { angle: f64, tol: f64 },

    #[error("required eigenvector is not unique up to scale: {0}")]
    EigenvectorAmbiguity(String),

    #[error("quadrature error {error:e} exceeds tolerance {tol:e} after maximum refinement")]
    QuadratureFailure { error: f64, tol: f64 },

    #[error("harmonic index must be nonzero")]
    InvalidHarmonic,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("Fourier conjugacy violated: |g_-j - conj(g_j)| = {norm:e}")]
    ConjugacyViolation { norm: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for configuration problems,
    /// 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParams(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}
