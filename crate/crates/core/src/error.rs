use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {index} out of range for {len} columns")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("index set must be strictly increasing")]
    UnsortedIndices,

    #[error("matrix is singular or not positive definite (pivot {pivot} at column {column})")]
    Singular { column: usize, pivot: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("non-finite objective after {iterations} iterations (step {step})")]
    StepSize { iterations: usize, step: f64 },

    #[error("oracle refuses n = {n}; enumeration is limited to n <= {max}")]
    OracleTooLarge { n: usize, max: usize },

    #[error("oracle found no KKT-feasible pattern")]
    OracleFailure,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

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
    /// Process exit code: 1 for bad input, 2 for runtime or numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DimensionMismatch(_)
            | Error::IndexOutOfRange { .. }
            | Error::UnsortedIndices
            | Error::InvalidConfig(_)
            | Error::InvalidWeights(_)
            | Error::OracleTooLarge { .. }
            | Error::EmptyInput(_)
            | Error::Json { .. } => 1,
            Error::Singular { .. }
            | Error::StepSize { .. }
            | Error::OracleFailure
            | Error::Io { .. }
            | Error::Csv { .. } => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
