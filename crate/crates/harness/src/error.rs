use std::fmt;

use dab_core::DabError;
use mihbench::KitError;
use serde::Serialize;
use thiserror::Error;
use toy_decoder::DecoderError;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Usage,
    Data,
    Invariant,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 1,
            ErrorKind::Data => 2,
            ErrorKind::Invariant => 3,
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::Usage => "usage",
            ErrorKind::Data => "data",
            ErrorKind::Invariant => "invariant",
        })
    }
}

#[derive(Debug, Error, Serialize)]
#[error("{kind} error: {message}")]
pub struct HarnessError {
    pub kind: ErrorKind,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub missing_ids: Vec<String>,
}

impl HarnessError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Usage, message)
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Data, message)
    }

    pub fn invariant(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Invariant, message)
    }

    fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
            missing_ids: Vec::new(),
        }
    }

    /// Single-line JSON record written to stderr on failure.
    pub fn to_record(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl From<KitError> for HarnessError {
    fn from(e: KitError) -> Self {
        match e {
            KitError::MissingIds(ids) => {
                const SHOWN: usize = 5;
                let mut message = format!(
                    "{} ids have no match: {}",
                    ids.len(),
                    ids[..ids.len().min(SHOWN)].join(", ")
                );
                if ids.len() > SHOWN {
                    message.push_str(&format!(" and {} more", ids.len() - SHOWN));
                }
                let mut err = Self::data(message);
                err.missing_ids = ids;
                err
            }
            other => Self::data(other.to_string()),
        }
    }
}

impl From<DabError> for HarnessError {
    fn from(e: DabError) -> Self {
        match e {
            DabError::Config(_) => Self::usage(e.to_string()),
            DabError::Format(_) => Self::data(e.to_string()),
            _ => Self::invariant(e.to_string()),
        }
    }
}

impl From<DecoderError> for HarnessError {
    fn from(e: DecoderError) -> Self {
        match e {
            DecoderError::Config(_) | DecoderError::Readout(_) => Self::usage(e.to_string()),
            DecoderError::Scene(_) | DecoderError::Unsupported { .. } => Self::data(e.to_string()),
            DecoderError::Attention(inner) => inner.into(),
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        Self::data(format!("io: {e}"))
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        Self::data(format!("json: {e}"))
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        Self::data(format!("csv: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
