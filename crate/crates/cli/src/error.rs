use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: relbound::Error },
    #[error(transparent)]
    Core(#[from] relbound::Error),
    #[error("{0}")]
    Usage(String),
    #[error("curves do not share the rate grid: {0}")]
    GridMismatch(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// 2 for solver failures, 1 for everything the user can fix.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if is_numerical(e) => 2,
            _ => 1,
        }
    }
}

/// Failures of an optimizer rather than of the input.
pub fn is_numerical(e: &relbound::Error) -> bool {
    use relbound::Error::*;
    matches!(e, NoConvergence { .. } | NumericalFailure { .. } | CertificateFailure { .. })
}
