// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad or inconsistent input data, files or configuration.
    Data,
    /// A numerical procedure failed on otherwise valid input.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate response: {0}")]
    DegenerateResponse(String),

    #[error("design matrix is rank deficient (rank {rank} of {columns} columns)")]
    SingularDesign { rank: usize, columns: usize },

    #[error("IRLS did not converge after {iterations} iterations (deviance {deviance})")]
    NotConverged {
        iterations: usize,
        deviance: f64,
        model: Box<crate::baseline::BaselineModel>,
    },

    #[error("baseline mean overflowed at day {day}")]
    Overflow { day: u32 },

    #[error("profile fit failed: {0}")]
    FitFailed(String),

    #[error("profile bank is empty: all {attempted} fits failed")]
    EmptyBank { attempted: usize },

    #[error("day {got} out of order (expected day {expected})")]
    OutOfOrderDay { expected: u32, got: u32 },

    #[error("baseline mean must be positive, got {0}")]
    NonpositiveLambda(f64),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("range mismatch: {0}")]
    RangeMismatch(String),

    #[error("{0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::SingularDesign { .. }
            | Error::NotConverged { .. }
            | Error::Overflow { .. }
            | Error::FitFailed(_)
            | Error::EmptyBank { .. } => ErrorKind::Numerical,
            _ => ErrorKind::Data,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

impl From<toml::de::Error> for Error {
    fn from(err: toml::de::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

impl From<toml::ser::Error> for Error {
    fn from(err: toml::ser::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
