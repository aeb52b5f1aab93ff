use dab_core::DabError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DecoderError {
    #[error("invalid decoder config: {0}")]
    Config(String),
    #[error("invalid scene: {0}")]
    Scene(String),
    #[error("invalid readout: {0}")]
    Readout(String),
    #[error("unsupported instance `{id}`: {reason}")]
    Unsupported { id: String, reason: String },
    #[error(transparent)]
    Attention(#[from] DabError),
}

pub type Result<T> = std::result::Result<T, DecoderError>;
