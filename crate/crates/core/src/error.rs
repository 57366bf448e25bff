use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spin: {0}")]
    InvalidSpin(String),

    #[error("probe polarization <S_z> = {0} outside [-1/2, 1/2]")]
    ProbeNotPositive(f64),

    #[error("dimension mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    DimensionMismatch {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("not a density matrix: {0}")]
    InvalidState(String),

    #[error("numerical degradation at step {step}: minimum eigenvalue {min_eigenvalue:e}")]
    NumericalDegradation { step: usize, min_eigenvalue: f64 },

    #[error("semiclassical model breakdown at step {step}: r = {r}")]
    ModelBreakdown { step: usize, r: f64 },

    #[error("audit failed: {0}")]
    AuditFailed(String),

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

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the `gyro` binary: 1 usage, 2 physics or
    /// audit failure, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidSpin(_) | Error::ProbeNotPositive(_) | Error::InvalidParameter { .. } => {
                1
            }
            Error::DimensionMismatch { .. }
            | Error::InvalidState(_)
            | Error::NumericalDegradation { .. }
            | Error::ModelBreakdown { .. }
            | Error::AuditFailed(_) => 2,
            Error::Io { .. } | Error::Csv { .. } => 3,
            Error::Json { .. } => 1,
        }
    }
}
