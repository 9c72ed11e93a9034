use std::path::PathBuf;

use thiserror::Error;

use crate::channels::NoiseKind;

/// Errors raised anywhere in the simulator, learners, data pipeline or harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("register of {dim}x{dim} exceeds the {max}x{max} bound")]
    RegisterTooLarge { dim: usize, max: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("amplitudes are not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("{kind:?} requires parameter `{name}`")]
    MissingParameter { kind: NoiseKind, name: &'static str },

    #[error("parameter `{name}` = {value} is outside its valid range")]
    ParameterOutOfRange { name: &'static str, value: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid training data: {0}")]
    InvalidData(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}:{line}: {reason}")]
    Parse { path: PathBuf, line: usize, reason: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
