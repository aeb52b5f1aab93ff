use thiserror::Error;

pub type Result<T> = std::result::Result<T, KitError>;

#[derive(Debug, Error)]
pub enum KitError {
    /// The input pool cannot supply what a builder was asked for.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("length mismatch: {left} predictions vs {right} gold labels")]
    LengthMismatch { left: usize, right: usize },

    #[error("missing ids: {}", .0.join(", "))]
    MissingIds(Vec<String>),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json (line {line}): {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
