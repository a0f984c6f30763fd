use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while reading, validating, or writing trajectory data.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column `{column}`: {message}")]
    Malformed {
        line: u64,
        column: String,
        message: String,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("site json: {0}")]
    SiteJson(#[from] serde_json::Error),
    #[error("duplicate state for vehicle {id} at frame {frame} (line {line})")]
    DuplicateState { id: u64, frame: u32, line: u64 },
    #[error("invalid site geometry: {0}")]
    Site(String),
    #[error("invalid track {id}: {message}")]
    Track { id: u64, message: String },
    #[error("invalid dataset: {0}")]
    Dataset(String),
    #[error("vehicle length must be positive, got {0}")]
    NonPositiveLength(f64),
}

/// Errors raised by TTC helpers that reject inconsistent inputs.
#[derive(Debug, Error, PartialEq)]
pub enum TtcError {
    #[error("lag front {lag_pos} is not behind lead rear (gap {gap})")]
    NegativeGap { lag_pos: f64, gap: f64 },
    #[error("lag position {lag_pos} must be behind lead position {lead_pos}")]
    LagAhead { lag_pos: f64, lead_pos: f64 },
}

#[derive(Debug, Error, PartialEq)]
pub enum DenoiseError {
    #[error("series of length {len} is too short for {levels} levels (need {need})")]
    TooShort { len: usize, levels: usize, need: usize },
    #[error("decomposition needs at least one level")]
    ZeroLevels,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{field} must be positive and finite, got {value}")]
    NotPositive { field: &'static str, value: f64 },
    #[error("ttc_threshold must not exceed 10 s, got {0}")]
    ThresholdTooLarge(f64),
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("injection {index}: {reason}")]
    InfeasibleInjection { index: usize, reason: String },
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error("could not place background vehicle {index} without interaction after {attempts} attempts")]
    Placement { index: usize, attempts: usize },
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serialize: {0}")]
    Json(#[from] serde_json::Error),
}
