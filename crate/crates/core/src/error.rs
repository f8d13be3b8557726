use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("matrix dimension exceeds the cap of {cap}")]
    DimensionCap { cap: usize },

    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("state space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("outcome mismatch: {0}")]
    OutcomeMismatch(String),

    #[error("vertex values are not affinely consistent (residual {residual:.3e})")]
    AffineInconsistency { residual: f64 },

    #[error("observable {index} has noise content {available} but needs {required} (deficit {deficit:.3e})")]
    InsufficientNoise {
        index: usize,
        available: f64,
        required: f64,
        deficit: f64,
    },

    #[error("product outcome grid of {cells} cells exceeds the cap of {cap}")]
    SizeCap { cells: usize, cap: usize },

    #[error("invalid PPOVM: {0}")]
    InvalidPpovm(String),

    #[error("random generation failed after {attempts} attempts")]
    GenerationFailure { attempts: usize },
}
