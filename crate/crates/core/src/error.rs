use thiserror::Error;

pub type Result<T> = std::result::Result<T, DabError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DabError {
    /// Shapes of the inputs do not agree.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A value lies outside its admissible range (negative weight, NaN, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid segment map: {0}")]
    Segments(String),

    #[error("invalid rebalance config: {0}")]
    Config(String),

    /// Malformed interchange file.
    #[error("format error: {0}")]
    Format(String),
}

impl DabError {
    /// Stable machine-readable kind, shared with foreign bindings.
    pub fn kind(&self) -> &'static str {
        match self {
            DabError::Dimension(_) => "dimension",
            DabError::Domain(_) => "domain",
            DabError::Segments(_) => "segments",
            DabError::Config(_) => "config",
            DabError::Format(_) => "format",
        }
    }
}
