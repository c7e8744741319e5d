use std::fmt;
use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

/// A single problem found while validating an input document.
///
/// `field` is a locator such as `use_cases[2].importance_score`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Pair of NFR labels that contradict each other.
pub type NfrPair = (String, String);

#[derive(Debug, Error)]
pub enum AprError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error at {locator}: {message}")]
    Format { locator: String, message: String },

    #[error("validation failed: {}", join_errors(.0))]
    Validation(Vec<FieldError>),

    #[error("unknown taxonomy path {0:?}")]
    Taxonomy(String),

    #[error("unknown NFR label {0:?}")]
    Vocabulary(String),

    #[error("NFR conflicts need priorities: {}", join_pairs(.pairs))]
    ResolutionRequired { pairs: Vec<NfrPair> },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl AprError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AprError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(locator: impl Into<String>, message: impl fmt::Display) -> Self {
        AprError::Format {
            locator: locator.into(),
            message: message.to_string(),
        }
    }

    /// Short machine-readable category name.
    pub fn category(&self) -> &'static str {
        match self {
            AprError::Io { .. } => "io",
            AprError::Format { .. } => "format",
            AprError::Validation(_) => "validation",
            AprError::Taxonomy(_) => "taxonomy",
            AprError::Vocabulary(_) => "vocabulary",
            AprError::ResolutionRequired { .. } => "resolution_required",
            AprError::Config(_) => "config",
            AprError::InvalidInput(_) => "invalid_input",
        }
    }
}

fn join_errors(errors: &[FieldError]) -> String {
    errors
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

fn join_pairs(pairs: &[NfrPair]) -> String {
    pairs
        .iter()
        .map(|(a, b)| format!("({a}, {b})"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T, E = AprError> = std::result::Result<T, E>;
