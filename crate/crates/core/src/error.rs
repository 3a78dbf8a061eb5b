use thiserror::Error;

/// Errors produced by the ODRO pipeline and its supporting modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdroError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("snapshots are identical after centering; no usable POD modes")]
    NoUsableModes,

    #[error(
        "iteration diverged after {snapshots} finite snapshot(s) at interval K = {interval}; \
         retry with a smaller snapshot interval (--interval)"
    )]
    DivergedTooFast { snapshots: usize, interval: usize },

    #[error(
        "unknown problem `{0}` (expected one of linear_map, lorenz, chafee_infante, heat_cfl)"
    )]
    UnknownProblem(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("instability precondition violated: {0}")]
    InstabilityPrecondition(String),

    #[error("finite-difference jacobian: non-finite residual when perturbing column {column}")]
    NonFiniteJacobian { column: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
}

pub type Result<T, E = OdroError> = std::result::Result<T, E>;
