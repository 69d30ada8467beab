use std::path::PathBuf;

use terrain_core::TerrainError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("parse error in `{token}` at column {column}: {message}")]
    Parse {
        token: String,
        column: usize,
        message: String,
    },

    #[error("unknown module `{name}`{hint}")]
    UnknownModule { name: String, hint: String },

    #[error("module `{name}` is not supported: {replacement}")]
    Unsupported { name: String, replacement: String },

    #[error("invalid program: {0}")]
    Structure(String),

    #[error("setting `{key}`: {message}")]
    Settings { key: String, message: String },

    #[error("invalid argument `{key}`: {message}")]
    Argument { key: String, message: String },

    #[error("module #{index} `{name}` failed: {source}\n  pipe: {pipe}")]
    Module {
        index: usize,
        name: String,
        #[source]
        source: Box<PipelineError>,
        pipe: String,
    },

    #[error(transparent)]
    Terrain(#[from] TerrainError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    pub fn arg(key: impl Into<String>, message: impl Into<String>) -> Self {
        PipelineError::Argument {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors detected before any module runs.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            PipelineError::Parse { .. }
                | PipelineError::UnknownModule { .. }
                | PipelineError::Unsupported { .. }
                | PipelineError::Structure(_)
                | PipelineError::Settings { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;
