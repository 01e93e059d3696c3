use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("duplicate index {0} in landmark set")]
    DuplicateIndex(usize),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("kernel is indefinite: eigenvalue {eigenvalue:e} below tolerance {tolerance:e}")]
    Indefinite { eigenvalue: f64, tolerance: f64 },

    #[error("projection direction is the zero vector")]
    ZeroVector,

    #[error("subset enumeration limited to {max} points, got {n}")]
    EnumerationTooLarge { n: usize, max: usize },

    #[error("all {0} candidate subsets have zero determinant")]
    DegenerateDistribution(usize),

    #[error("selection weights exhausted before draw {iteration} (all weights are zero)")]
    ExhaustedMass { iteration: usize },

    #[error("eigenvalue {index} is zero; cannot invert")]
    ZeroEigenvalue { index: usize },

    #[error("point {index} has zero kernel weight to every landmark")]
    IsolatedPoint { index: usize },

    #[error("covariance is not positive definite")]
    NotPositiveDefinite,

    #[error("Bhattacharyya neighborhoods require per-landmark covariances")]
    MissingCovariances,

    #[error("graph has {components} connected components; embedding needs a connected graph")]
    Disconnected { components: usize },

    #[error("eigensolver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("{what} of size {n} exceeds limit {max}")]
    TooLarge { what: &'static str, n: usize, max: usize },

    #[error("{path}: bad magic number {found:#010x}, expected {expected:#010x}")]
    IdxMagic { path: PathBuf, expected: u32, found: u32 },

    #[error("{path}: truncated payload ({actual} bytes, expected {expected})")]
    IdxTruncated { path: PathBuf, expected: usize, actual: usize },

    #[error("image count {images} does not match label count {labels}")]
    IdxCountMismatch { images: usize, labels: usize },

    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("csv file contains no points")]
    EmptyCsv,

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Wraps an error with the pipeline stage that produced it.
    pub fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let line = e
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or_default();
        Error::Csv {
            line,
            message: e.to_string(),
        }
    }
}
