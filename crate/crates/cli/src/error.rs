use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read config {}: {source}", path.display())]
    ConfigIo { path: PathBuf, source: io::Error },

    #[error("invalid config {}: {source}", path.display())]
    ConfigParse {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error("invalid config: {0}")]
    Schema(String),

    #[error(transparent)]
    Physics(#[from] qnoise::Error),

    #[error("cannot write {}: {source}", path.display())]
    Output { path: PathBuf, source: io::Error },
}

impl CliError {
    /// 1 for usage and config problems, 2 for physics and validation failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Physics(_) => 2,
            _ => 1,
        }
    }
}
