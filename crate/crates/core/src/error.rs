use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("agent {agent} at t={time}: position {position} exceeds bound {bound}")]
    PositionBound {
        agent: u64,
        time: u64,
        position: i32,
        bound: i32,
    },
    #[error("agent {agent} at t={time}: wealth {wealth} != cash + position * price ({expected})")]
    Accounting {
        agent: u64,
        time: u64,
        wealth: f64,
        expected: f64,
    },
    #[error(
        "zero-sum violated at t={time}: agents {agents} + market maker {market_maker} = {residual}"
    )]
    ZeroSum {
        time: u64,
        agents: f64,
        market_maker: f64,
        residual: f64,
    },
    #[error("eviction called off schedule at t={time} (period {period})")]
    OffSchedule { time: u64, period: u64 },
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("empty window")]
    EmptyWindow,
    #[error("window of {len} samples is shorter than the required {required}")]
    WindowTooShort { len: usize, required: usize },
    #[error("price changes and histories are misaligned ({changes} vs {histories})")]
    Misaligned { changes: usize, histories: usize },
    #[error("tail threshold is zero; too few non-zero samples")]
    DegenerateTail,
}

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("cannot open {path}: {source}")]
    MissingFile {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("column `{0}` not found in header")]
    MissingColumn(String),
    #[error("row {row}: close `{value}` is not a number")]
    NonNumericClose { row: usize, value: String },
    #[error("row {row}: close {value} is not positive")]
    NonPositiveClose { row: usize, value: f64 },
    #[error("row {row}: invalid date `{value}` (expected YYYY-MM-DD)")]
    InvalidDate { row: usize, value: String },
    #[error("series has {len} rows, need at least {required}")]
    TooShort { len: usize, required: usize },
}

#[derive(Debug, Error)]
pub enum BacktestError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("wealth-based positions need a positive initial wealth, got {0}")]
    NonPositiveInitialWealth(f64),
    #[error("invalid backtest parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Backtest(#[from] BacktestError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Resume(String),
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("line {line}: `{token}` is not one of -1, 0, 1")]
    BadEntry { line: usize, token: String },
    #[error("line {line}: row has {len} entries, which is not a power of two >= 2")]
    BadLength { line: usize, len: usize },
    #[error("line {line}: row has {len} entries but earlier rows have {expected}")]
    Ragged {
        line: usize,
        len: usize,
        expected: usize,
    },
}
