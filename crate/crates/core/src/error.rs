use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("degree must be at least 1")]
    ZeroDegree,

    #[error("degree {degree} exceeds the supported maximum {max}")]
    DegreeTooLarge { degree: usize, max: usize },

    #[error("{what}: n = {n} is outside the valid range {range}")]
    OutOfRange {
        what: String,
        n: u64,
        range: String,
    },

    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },

    #[error("cache {path}, line {line}: {reason}")]
    Cache {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn out_of_range(what: impl Into<String>, n: u64, range: impl Into<String>) -> Self {
        Error::OutOfRange {
            what: what.into(),
            n,
            range: range.into(),
        }
    }
}
