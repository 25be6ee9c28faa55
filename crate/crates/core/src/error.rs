use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("map parse error at line {line}: {msg}")]
    MapParse { line: usize, msg: String },

    #[error("missing source")]
    MissingSource,

    #[error("missing terminal")]
    MissingTerminal,

    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),

    #[error("terminal is unreachable from source")]
    Unreachable,

    #[error("requested {requested} distinct simple paths but only {available} exist")]
    NotEnoughPaths { requested: usize, available: usize },

    #[error("index {index} out of range for {what} (size {size})")]
    OutOfRange { what: &'static str, index: usize, size: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("degenerate payoff range: min {min} equals max {max}")]
    DegeneratePayoffRange { min: f64, max: f64 },

    #[error("payoffs must lie in [0, 1] for this solver (found [{min}, {max}]); normalize the instance first")]
    NotNormalized { min: f64, max: f64 },

    #[error("instance too large to materialize densely: {entries} entries exceeds limit {limit}")]
    TooLarge { entries: u128, limit: usize },

    #[error("instance has no sensor model (built directly from payoff matrices)")]
    NoSensorModel,

    #[error("invalid parameter `{name}`: {msg}")]
    InvalidParameter { name: &'static str, msg: String },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("inconsistent payoff pair: {0}")]
    InconsistentPayoffs(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, msg: impl Into<String>) -> Self {
        Error::InvalidParameter { name, msg: msg.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
