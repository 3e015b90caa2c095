use thiserror::Error;

use crate::conic::SolveStatus;

/// Errors raised by the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (minimum eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("Hermitian eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("identity is not in the span of the generators (residual {0:.3e})")]
    UnitNotInSpan(f64),

    #[error("generating set spans the zero space")]
    EmptySpan,

    #[error("matrix level {level} exceeds the configured maximum {max}")]
    LevelOverflow { level: usize, max: usize },

    #[error("element is not in the cone (margin {0:.3e})")]
    NotInCone(f64),

    #[error("conic solver returned {status:?}: {context}")]
    Solver { status: SolveStatus, context: String },

    #[error("no reference base point is available for this provider")]
    NoReferencePoint,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
