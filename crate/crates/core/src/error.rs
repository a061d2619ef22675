use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = BaafError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum BaafError {
    /// Invalid argument or configuration value.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Input data violates a dataset invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// Payload does not match its declared shape.
    #[error("shape error: {0}")]
    Shape(String),

    /// Non-finite or otherwise unusable numeric input.
    #[error("data error: {0}")]
    Data(String),

    /// Covariance could not be factorized.
    #[error("singular covariance: {0}")]
    Singular(String),

    /// Mixture fit or crossover has no unique solution.
    #[error("degenerate fit: {0}")]
    Degenerate(String),

    #[error("metric error: {0}")]
    Metric(String),

    #[error("generator error: {0}")]
    Generator(String),

    /// Every training sample was filtered out.
    #[error("all {0} samples were removed by the filter; refusing to train an empty model")]
    AllRemoved(usize),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl BaafError {
    /// Process exit code: 2 usage, 3 data/validation, 4 numerical degeneracy.
    pub fn exit_code(&self) -> i32 {
        match self {
            BaafError::Parameter(_) => 2,
            BaafError::Validation(_)
            | BaafError::Shape(_)
            | BaafError::Data(_)
            | BaafError::Metric(_)
            | BaafError::Generator(_)
            | BaafError::Io { .. }
            | BaafError::Format { .. } => 3,
            BaafError::Singular(_) | BaafError::Degenerate(_) | BaafError::AllRemoved(_) => 4,
            BaafError::Internal(_) => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BaafError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        BaafError::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}

macro_rules! param_err {
    ($($arg:tt)*) => { $crate::error::BaafError::Parameter(format!($($arg)*)) };
}
pub(crate) use param_err;
