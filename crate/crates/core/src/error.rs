use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = QrcError> = std::result::Result<T, E>;

/// Every failure the reservoir pipeline can report.
#[derive(Debug, Error)]
pub enum QrcError {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {dim} is not a power of two")]
    NotPowerOfTwo { dim: usize },

    #[error("partial trace needs at least two qubits, state has {n_qubits}")]
    DimensionTooSmall { n_qubits: usize },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("expectation value has imaginary part {imag:.3e}")]
    NonRealExpectation { imag: f64 },

    #[error("site {site} is outside 1..={n_qubits}")]
    SiteOutOfRange { site: usize, n_qubits: usize },

    #[error("site {site} appears more than once in a Pauli string")]
    DuplicateSite { site: usize },

    #[error("encoded input {value} is outside [0, 1]")]
    InputOutOfRange { value: f64 },

    #[error("potential value {value} at point {index} exceeds v_max = {v_max}")]
    VMaxViolated { index: usize, value: f64, v_max: f64 },

    #[error("potential is empty")]
    EmptyPotential,

    #[error("potential value at point {index} is not finite")]
    NonFinitePotential { index: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("row {row} has {found} fields, expected {expected}")]
    ShapeMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("wrong observable arity: expected {expected}, found {found}")]
    WrongArity { expected: usize, found: usize },

    #[error("non-finite value in least-squares input")]
    NonFiniteInput,

    #[error("model kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },

    #[error("targets have zero variance, R² is undefined")]
    DegenerateTargets,

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("fingerprint mismatch in {artifact}: expected {expected}, found {found}")]
    FingerprintMismatch {
        artifact: String,
        expected: String,
        found: String,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl QrcError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        QrcError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        QrcError::Json {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 usage, 2 data error, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        use QrcError::*;
        match self {
            InvalidConfig(_) => 1,
            NotHermitian { .. }
            | NonRealExpectation { .. }
            | InvalidDensityMatrix(_)
            | NonFiniteInput
            | DegenerateTargets
            | Numerical(_) => 3,
            _ => 2,
        }
    }
}
