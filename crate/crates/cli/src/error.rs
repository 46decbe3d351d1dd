use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigErrors;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error:\n{0}")]
    Config(#[from] ConfigErrors),

    #[error(transparent)]
    Core(#[from] latgate_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Process exit status: 2 for bad input, 3 for a violated physical
    /// constraint, 4 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        use latgate_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Core(E::InvalidArgument(_) | E::UnknownGate(_) | E::SiteOutOfRange { .. }) => 2,
            CliError::Core(E::Constraint(_) | E::EmptyBasis { .. }) => 3,
            CliError::Core(_) => 4,
            CliError::Io { .. } => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
