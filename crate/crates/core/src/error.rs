use std::path::PathBuf;

use thiserror::Error;

use crate::meta::Statistic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file access failed")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no rows")]
    NoRows,

    #[error("no records")]
    NoRecords,

    #[error("duplicate cell (segment {segment:?}, system {system:?})")]
    DuplicateCell { segment: String, system: String },

    #[error("duplicate {axis} identifier {id:?}")]
    DuplicateId { axis: &'static str, id: String },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("axes of metric and human matrices differ")]
    AxisMismatch,

    #[error("empty intersection on the {0} axis")]
    EmptyIntersection(&'static str),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("record references unknown cell (segment {segment:?}, system {system:?})")]
    UnknownCell { segment: String, system: String },

    #[error("negative weight {weight} on line {line}")]
    NegativeWeight { line: usize, weight: f64 },

    #[error("invalid noise level {level} for {kind}")]
    InvalidNoiseLevel { kind: &'static str, level: f64 },

    #[error("invalid levels: {0}")]
    InvalidLevels(String),

    #[error("{0}")]
    InvalidArgument(String),

    /// A statistic could not be computed because the data has too little
    /// structure (too few cells, no usable segments, no pairs).
    #[error("{statistic}: {reason}")]
    Degenerate { statistic: Statistic, reason: &'static str },

    #[error("{statistic}: degenerate SDP denominator {denominator:e}")]
    DegenerateDenominator { statistic: Statistic, denominator: f64 },

    #[error("need at least {needed} categories, found {found}")]
    TooFewCategories { needed: usize, found: usize },
}

impl Error {
    /// True for errors that come from a statistic being undefined on
    /// otherwise well-formed input.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::Degenerate { .. } | Error::DegenerateDenominator { .. } | Error::TooFewCategories { .. }
        )
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
