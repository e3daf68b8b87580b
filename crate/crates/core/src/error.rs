use thiserror::Error;

/// Errors raised by the solver core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QklsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resource limit: {qubits} qubits exceeds the dense cap of {cap}")]
    ResourceLimit { qubits: usize, cap: usize },

    #[error("singular Hamiltonian: eigenvalue {eigenvalue:e} is below {tolerance:e}")]
    SingularHamiltonian { eigenvalue: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate projected system: every singular value was truncated")]
    DegenerateSystem,

    #[error("null state: norm {norm:e} is too small to normalize")]
    NullState { norm: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = QklsError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> QklsError {
    QklsError::InvalidParameter(msg.into())
}
