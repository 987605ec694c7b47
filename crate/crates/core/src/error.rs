use std::path::PathBuf;

/// Errors produced by the library, grouped by the pipeline stage they
/// originate from so the CLI can map them onto distinct exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("data error in {path}: {message}")]
    DataFile { path: PathBuf, message: String },
    #[error("training error ({technique}): {message}")]
    Training { technique: String, message: String },
    #[error("evaluation error: {0}")]
    Evaluation(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn training(technique: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Training {
            technique: technique.into(),
            message: msg.into(),
        }
    }

    /// Exit code for the CLI: 2 config, 3 data, 4 training, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Data(_) | Error::DataFile { .. } | Error::Csv(_) => 3,
            Error::Training { .. } => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
