use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no frames in {}", .0.display())]
    NoFrames(PathBuf),

    #[error("cannot decode frame {}: {reason}", .path.display())]
    Decode { path: PathBuf, reason: String },

    #[error(
        "frame {} is {got_w}x{got_h}, expected {want_w}x{want_h}",
        .path.display()
    )]
    DimensionMismatch {
        path: PathBuf,
        want_w: usize,
        want_h: usize,
        got_w: usize,
        got_h: usize,
    },

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("wrong yuv layout: expected {expected}")]
    WrongLayout { expected: &'static str },

    #[error("frame too small: {0}")]
    FrameTooSmall(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("feature schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("rank-deficient design matrix: {0}")]
    RankDeficient(String),

    #[error("provider error (retriable): {0}")]
    Provider(String),

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("ratings: {0}")]
    Ratings(String),

    #[error("io error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures that may succeed when the same call is repeated.
    pub fn is_retriable(&self) -> bool {
        matches!(self, Error::Provider(_))
    }
}
