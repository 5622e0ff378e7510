use std::path::PathBuf;

/// Errors produced by the synthesis, analysis, model and evaluation code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate series: {0}")]
    Degenerate(String),

    #[error("empty region of interest at frame(s) {frames:?}")]
    EmptyRoi { frames: Vec<usize> },

    #[error("need at least 2 peaks to estimate a rate, found {found}")]
    InsufficientPeaks { found: usize },

    #[error("empty prediction mask")]
    EmptyPrediction,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value in {0}")]
    Numeric(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
