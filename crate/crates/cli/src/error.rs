use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed JSON: {source}")]
    Syntax {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("config error in {field}: {message}")]
    Config { field: String, message: String },

    #[error("certificate violated: {0}")]
    CertificateViolation(selftrig::Error),

    #[error("prediction failed: {0}")]
    Predictor(selftrig::Error),

    #[error("verification failed: {0}")]
    Mismatch(String),

    #[error("{0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl std::fmt::Display) -> Self {
        Self::Config {
            field: field.into(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io { .. } | Self::Csv(_) => 1,
            Self::Syntax { .. } | Self::Config { .. } => 2,
            Self::CertificateViolation(_) => 3,
            Self::Predictor(_) => 4,
            Self::Mismatch(_) => 5,
        }
    }
}

/// Sorts a simulation-time error into the exit-code classes.
pub fn from_run_error(e: selftrig::Error) -> CliError {
    match e {
        selftrig::Error::CertificateViolation { .. } => CliError::CertificateViolation(e),
        other => CliError::Predictor(other),
    }
}
