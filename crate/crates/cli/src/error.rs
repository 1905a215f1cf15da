use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] rpd_core::Error),
    #[error("{path} was written by a different config; refusing to resume")]
    ConfigMismatch { path: PathBuf },
    #[error("malformed record file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error("validation failed: {0} check(s) did not pass")]
    ValidationFailed(usize),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag for the error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) | Self::Toml(_) => "config",
            Self::Io { .. } => "io",
            Self::Csv(_) | Self::Malformed { .. } => "records",
            Self::Json(_) => "json",
            Self::Core(_) => "core",
            Self::ConfigMismatch { .. } => "config_mismatch",
            Self::InsufficientData(_) => "insufficient_data",
            Self::ThreadPool(_) => "threads",
            Self::ValidationFailed(_) => "validation",
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
