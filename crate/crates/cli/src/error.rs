use std::path::PathBuf;

use irrepsync::SyncError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input; `line` is 1-based.
    #[error("{origin}:{line}: {message}")]
    Parse { origin: String, line: usize, message: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Sync(#[from] SyncError),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn parse_error(origin: &str, line: usize, message: impl Into<String>) -> CliError {
    CliError::Parse { origin: origin.to_string(), line, message: message.into() }
}

pub fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn write_file(path: &std::path::Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}
