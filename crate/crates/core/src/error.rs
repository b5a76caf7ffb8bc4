use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid direction: theta {theta} must lie in [-90, 90] and both angles be finite")]
    InvalidDirection { theta: f64, phi: f64 },

    #[error("invalid camera: {0}")]
    InvalidCamera(String),

    #[error("pixel ({x}, {y}) outside {width}x{height} raster")]
    PixelOutOfRange {
        x: f64,
        y: f64,
        width: u32,
        height: u32,
    },

    #[error("video of {duration}s is shorter than one {interval}s glimpse interval")]
    EmptyGrid { duration: f64, interval: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("frames cover {available} of the {required} frames needed for the glimpse span")]
    IncompleteSpan { required: usize, available: usize },

    #[error("score map: {0}")]
    ScoreMap(String),

    #[error("feature set: {0}")]
    FeatureSet(String),

    #[error("need at least {needed} negatives but only {available} are available")]
    InsufficientNegatives { needed: usize, available: usize },

    #[error("degenerate training data: {0}")]
    DegenerateData(String),

    #[error("missing features for glimpse {0}")]
    MissingCell(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("trajectory length mismatch: {a} vs {b} frames")]
    LengthMismatch { a: usize, b: usize },

    #[error("trajectory: {0}")]
    Trajectory(String),

    #[error("label alphabets differ: {source_labels:?} vs {target_labels:?}")]
    LabelMismatch {
        source_labels: Vec<String>,
        target_labels: Vec<String>,
    },

    #[error("need at least {folds} distinct videos for {folds}-fold splitting, found {found}")]
    TooFewGroups { folds: usize, found: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
