use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch (expected {expected}, found {found})")]
    DimensionMismatch {
        op: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("degenerate search direction: p'Ap = {curvature:e} is not positive")]
    DegenerateDirection { curvature: f64 },

    #[error("momentum coefficient has a vanishing denominator ({denominator:e})")]
    ZeroDenominator { denominator: f64 },

    #[error("matrix is singular to working precision (sigma_min / sigma_max = {ratio:e})")]
    Singular { ratio: f64 },

    #[error("{0} must be nonzero")]
    ZeroVector(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("column `{column}` has no values; available columns: {}", available.join(", "))]
    EmptyColumn {
        column: String,
        available: Vec<String>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("right-hand-side construction did not converge after {attempts} attempts (last residual {residual:e})")]
    ConstructionFailed { attempts: usize, residual: f64 },

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
}
