use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cost vector has {actual} entries, expected {expected}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("cost {value} outside (0, 1] in knapsack {knapsack}")]
    CostOutOfRange { value: f64, knapsack: usize },

    #[error("element ordinal {got} arrived after ordinal {last} (stream must be in order)")]
    OutOfOrder { last: u64, got: u64 },

    #[error("ordinal must be positive")]
    ZeroOrdinal,

    #[error("estimate bounds corrupted: lower {lower} exceeds upper {upper}")]
    CorruptBounds { lower: f64, upper: f64 },

    #[error("window of {len} elements exceeds the brute-force cap of {cap}")]
    WindowTooLarge { len: usize, cap: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cost scheme `{scheme}` produced cost {value} outside (0, 1]")]
    SchemeOutOfRange { scheme: String, value: f64 },

    #[error("line {line}: {msg}")]
    Ingest { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
