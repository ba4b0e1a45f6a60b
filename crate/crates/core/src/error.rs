use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("input contains no parsable series")]
    NoSeries,

    #[error("duplicate observation for `{label}` on {date}")]
    DuplicateObservation { label: String, date: NaiveDate },

    #[error("index `{label}` has no observations after alignment")]
    EmptyAfterAlignment { label: String },

    #[error("index `{label}` has no prior close to carry forward on {date}")]
    NoPriorClose { label: String, date: NaiveDate },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} needs at least {needed} values, got {got}")]
    TooShort {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("series `{label}` has zero variance")]
    Degenerate { label: String },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("eigensolver did not converge after {rotations} rotations (off-diagonal residual {residual:e})")]
    NoConvergence { rotations: usize, residual: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

impl Error {
    /// True for failures of the numerics rather than of the input data or
    /// parameters.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Degenerate { .. }
                | Error::NonFinite(_)
                | Error::NoConvergence { .. }
                | Error::DegenerateFit(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
