use std::path::PathBuf;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid depth {0}: must be finite and > 0")]
    InvalidDepth(f64),
    #[error("pixel ({u}, {v}) is outside the camera's valid image region")]
    InvalidPixel { u: usize, v: usize },
    #[error("invalid transform: {0}")]
    InvalidTransform(String),
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },
    #[error("invalid height band [{h_min}, {h_max}]")]
    InvalidBand { h_min: f64, h_max: f64 },
    #[error("nothing was projected into the target view")]
    EmptySynthesis,
    #[error("objective evaluation failed: {0}")]
    Evaluation(String),
    #[error("optimization failed: {0}")]
    OptimizationFailure(String),
    #[error("scene generation failed: {0}")]
    Generation(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("malformed {format} data: {reason}")]
    Format {
        format: &'static str,
        reason: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn shape(expected: impl ToString, got: impl ToString) -> Self {
        Error::Shape {
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
