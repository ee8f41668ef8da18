use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("invalid qubit pair ({q1}, {q2}) for a {num_qubits}-qubit register")]
    InvalidQubitPair {
        q1: usize,
        q2: usize,
        num_qubits: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {0} is not a nonzero power of two")]
    InvalidDimension(usize),

    #[error("state is not normalized (norm = {0})")]
    NotNormalized(f64),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot cover {num_cosets} cosets with a training set of {train_size} points")]
    InfeasibleSplit { num_cosets: usize, train_size: usize },

    #[error("{num_qubits} qubits exceeds simulator capacity (max {max})")]
    CapacityExceeded { num_qubits: usize, max: usize },

    #[error("need at least 2 {class} entries, found {count}")]
    InsufficientEntries { class: &'static str, count: usize },

    #[error("{violations} kernel entries fall outside their noise envelopes")]
    BoundViolation { violations: usize },

    #[error("report contains no trials")]
    EmptyReport,

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable identifier, used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::QubitOutOfRange { .. } => "qubit_out_of_range",
            Error::InvalidQubitPair { .. } => "invalid_qubit_pair",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidDimension(_) => "invalid_dimension",
            Error::NotNormalized(_) => "not_normalized",
            Error::NotUnitary(_) => "not_unitary",
            Error::NonFinite(_) => "non_finite",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::InfeasibleSplit { .. } => "infeasible_split",
            Error::CapacityExceeded { .. } => "capacity_exceeded",
            Error::InsufficientEntries { .. } => "insufficient_entries",
            Error::BoundViolation { .. } => "bound_violation",
            Error::EmptyReport => "empty_report",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
