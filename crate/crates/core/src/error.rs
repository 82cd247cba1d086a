use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced by the lane post-processing stages.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// The calibration quad cannot define a homography.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// A point mapped to (or from) the line at infinity.
    #[error("projective degeneracy: w = {w:e}")]
    ProjectiveDegeneracy { w: f64 },

    /// A multi-point instance whose points all share one y value.
    #[error("degenerate orientation: {points} points share y = {y}")]
    DegenerateOrientation { points: usize, y: f64 },

    /// A curve with zero extent cannot be sampled at more than one point.
    #[error("degenerate extent: y_min = y_max = {0}")]
    DegenerateExtent(f64),

    /// The pipeline configuration is malformed or out of range.
    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {reason}", path.display())]
    Io { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        Error::Io {
            path: path.into(),
            reason: reason.to_string(),
        }
    }

    /// Coarse classification used for process exit codes.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) => ErrorCategory::Config,
            Error::Io { .. } => ErrorCategory::Io,
            _ => ErrorCategory::Processing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Io,
    Processing,
}
