use std::path::Path;

use defect_fields::DefectError;

/// Failure of a CLI run, mapped onto the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] DefectError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("verification failed: {0}")]
    ChecksFailed(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Usage(_) | CliError::Domain(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}
