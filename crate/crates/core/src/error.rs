use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite entry encountered ({context})")]
    NonFinite { context: String },

    #[error("matrix is singular or ill-conditioned (cond >= {cond:.3e})")]
    Singular { cond: f64 },

    #[error("invalid norm specification: {0}")]
    InvalidNormSpec(String),

    #[error("zero vector not admitted: {0}")]
    ZeroVector(String),

    #[error("matrix is not Metzler (off-diagonal entry {value:.6e} at ({row},{col}))")]
    NotMetzler { row: usize, col: usize, value: f64 },

    #[error("matrix is reducible; the Perron construction requires irreducibility")]
    Reducible,

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("integration failed at t={t}: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    #[error("model error: {0}")]
    Model(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
