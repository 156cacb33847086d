use std::path::PathBuf;

use thiserror::Error;

/// Failure of a run, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or malformed input, or an argument the core rejects as invalid.
    #[error("{0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// The computation itself failed (infeasible, did not converge, budget).
    #[error("{0}")]
    Compute(sfkit_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Compute(_) => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<sfkit_core::Error> for CliError {
    fn from(e: sfkit_core::Error) -> Self {
        use sfkit_core::Error as E;
        match e {
            E::Empty(_) | E::DimensionMismatch { .. } | E::NonFinite(_) | E::InvalidArgument(_) => {
                CliError::Parse(e.to_string())
            }
            other => CliError::Compute(other),
        }
    }
}
