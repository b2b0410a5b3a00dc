use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid value: {0}")]
    Validation(String),

    #[error("window {window} lies outside a {width}x{height} image")]
    Bounds {
        window: String,
        width: usize,
        height: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("detector failed on tile {tile_index}: {message}")]
    Backend { tile_index: usize, message: String },

    #[error("{} tile(s) failed: {}", .0.len(), summarize_failures(.0))]
    TileFailures(Vec<(usize, String)>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image decode failed: {0}")]
    Decode(String),
}

impl Error {
    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn summarize_failures(failures: &[(usize, String)]) -> String {
    failures
        .iter()
        .map(|(tile, msg)| format!("[tile {tile}] {msg}"))
        .collect::<Vec<_>>()
        .join("; ")
}
