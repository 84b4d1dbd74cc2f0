//! Error type shared by all core modules.

use thiserror::Error;

/// Errors produced by the geometry, registration, loss, evaluation and
/// data-generation modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point cloud must not be empty")]
    EmptyPointCloud,

    #[error("non-finite coordinate at point {index}")]
    NonFinitePoint { index: usize },

    #[error("degenerate model: bounding-box diagonal is zero")]
    DegenerateModel,

    #[error("invalid rotation matrix: {reason}")]
    InvalidRotation { reason: String },

    #[error("scale must be positive and finite, got {value}")]
    InvalidScale { value: f64 },

    #[error("invalid box extents: all must be positive and finite")]
    InvalidExtents,

    #[error("invalid camera intrinsics: fx and fy must be positive")]
    InvalidIntrinsics,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {detail}")]
    DimensionMismatch { detail: String },

    #[error("resample count must be positive")]
    ZeroSampleCount,

    #[error("degenerate correspondence configuration: {reason}")]
    DegenerateConfiguration { reason: String },

    #[error("invalid RANSAC parameters: {reason}")]
    InvalidRansacParams { reason: String },

    #[error(
        "RANSAC found no consensus: best hypothesis had {best_inlier_count} inliers \
         (need >= {required}) after {iterations_run} iterations"
    )]
    FitFailure {
        best_inlier_count: usize,
        required: usize,
        iterations_run: usize,
        /// Best transform seen, if any hypothesis was viable at all.
        best_transform: Option<Box<crate::geometry::SimilarityTransform>>,
    },

    #[error("unknown category '{name}' (expected one of bottle, bowl, camera, can, laptop, mug)")]
    UnknownCategory { name: String },

    #[error("category 'mug' requires the handle_visible flag")]
    MissingHandleFlag,

    #[error("handle_visible is only meaningful for category 'mug', found it on '{category}'")]
    UnexpectedHandleFlag { category: String },

    #[error("invalid correspondence matrix: {reason}")]
    InvalidCorrespondenceMatrix { reason: String },

    #[error("invalid loss weights: all lambdas must be non-negative and finite")]
    InvalidLossWeights,

    #[error("invalid threshold spec: {reason}")]
    InvalidThreshold { reason: String },

    #[error("invalid record ({location}): {reason}")]
    InvalidRecord { location: String, reason: String },

    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error("no masked pixels with valid depth")]
    NoValidPixels,

    #[error("PLY parse error at line {line}: {message}")]
    PlyParse { line: usize, message: String },

    #[error("PGM parse error: {message}")]
    PgmParse { message: String },

    #[error("CSV parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },

    #[error("empty input: {what}")]
    EmptyInput { what: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error on {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn json(path: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json { path: path.into(), source }
    }

    /// True for errors caused by bad input (files, parameters, schemas) as
    /// opposed to algorithmic failures such as a RANSAC consensus miss.
    pub fn is_invalid_input(&self) -> bool {
        !matches!(self, Error::FitFailure { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
