use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by terrain construction, generation, analysis and I/O.
#[derive(Debug, Error)]
pub enum TerrainError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid size {size} along {axis} is not divisible into {parts} pieces")]
    NotDivisible { axis: char, size: usize, parts: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid tiling: {0}")]
    InvalidTiling(String),

    #[error("non-finite height {value} at cell ({i}, {j})")]
    NonFinite { i: usize, j: usize, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("expression error at column {column}: {message}")]
    Expression { column: usize, message: String },

    #[error("no terrains to operate on")]
    NoTerrains,

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("unknown colormap `{name}` (available: {available})")]
    UnknownColormap { name: String, available: String },

    #[error("format error in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl TerrainError {
    pub fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        TerrainError::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        TerrainError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        TerrainError::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, TerrainError>;
