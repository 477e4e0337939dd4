// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// Errors raised by the detection library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("ragged panel: series {series} has {found} observations, expected {expected}")]
    RaggedPanel {
        series: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value at series {series}, time position {position}")]
    NonFinite { series: usize, position: usize },
    #[error("empty panel: {0}")]
    EmptyPanel(String),
    #[error("time index must be strictly increasing (position {0})")]
    UnorderedTimeIndex(usize),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("misaligned series: {0}")]
    MisalignedSeries(String),
    #[error("zero games at time {0} with a non-missing count")]
    ZeroGames(i32),
    #[error("degenerate season: {0}")]
    DegenerateSeason(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("input is not sorted in descending order at position {0}")]
    UnsortedInput(usize),
    #[error("m = {m} outside 1..={n}")]
    BadM { m: usize, n: usize },

    #[error("configuration error: {0}")]
    Config(String),
    #[error("rank deficient: {0}")]
    RankDeficient(String),
    #[error("detection result does not belong to this panel (fingerprint {expected} vs {found})")]
    FingerprintMismatch { expected: String, found: String },
    #[error("scale -{scale} too coarse for a series of length {len}")]
    ScaleTooCoarse { scale: u32, len: usize },
    #[error("instance too large for the brute-force oracle ({cost} > {limit})")]
    InstanceTooLarge { cost: u64, limit: u64 },

    #[error("parse error at row {row}, column {column}: {reason}")]
    Parse {
        row: usize,
        column: String,
        reason: String,
    },
    #[error("unknown franchise id {0:?}")]
    UnknownFranchise(String),
    #[error("missing years: {0:?}")]
    MissingYears(Vec<i32>),
    #[error("franchise {franchise} is missing from years {years:?}")]
    MissingFranchiseYear { franchise: String, years: Vec<i32> },
    #[error("franchise {franchise} has {seasons} seasons, need at least {required}")]
    FranchiseTooShort {
        franchise: String,
        seasons: usize,
        required: usize,
    },
    #[error("spec file line {line}: {reason}")]
    SpecSyntax { line: usize, reason: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors that originate in reading or interpreting input files.
    pub fn is_ingest(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::UnknownFranchise(_)
                | Error::MissingYears(_)
                | Error::MissingFranchiseYear { .. }
                | Error::FranchiseTooShort { .. }
                | Error::SpecSyntax { .. }
                | Error::MisalignedSeries(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
