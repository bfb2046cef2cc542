use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = AtlasError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum AtlasError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] atlas_core::Error),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl AtlasError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AtlasError::Io { path: path.into(), source }
    }

    /// 1 for failed checks, 2 for anything wrong with the input.
    pub fn exit_code(&self) -> u8 {
        match self {
            AtlasError::Verification(_) => 1,
            _ => 2,
        }
    }
}
