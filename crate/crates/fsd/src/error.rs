//! CLI error type and its exit-code mapping.

use std::path::{Path, PathBuf};

/// Exit codes: 1 usage, 2 I/O, 3 data, 4 model/feature layout mismatch.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Malformed file content; `line` 0 means the whole file.
    #[error("{path}:{line}: {msg}")]
    Format { path: PathBuf, line: usize, msg: String },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] fsd_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn format(path: &Path, line: usize, msg: impl Into<String>) -> Self {
        CliError::Format { path: path.to_path_buf(), line, msg: msg.into() }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Core(fsd_core::Error::LayoutMismatch { .. }) => 4,
            CliError::Format { .. } | CliError::Data(_) | CliError::Core(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
