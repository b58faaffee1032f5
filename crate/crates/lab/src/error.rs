use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    /// The config text does not match the schema (toml reports the key and line).
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),

    /// A value is present but not acceptable.
    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("unknown preset `{name}`; available: {available}")]
    UnknownPreset { name: String, available: String },

    #[error("experiment `{experiment}` failed: {source}")]
    Module {
        experiment: String,
        #[source]
        source: blowup_core::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    pub fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        LabError::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }

    /// 2 for problems with the configuration, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Parse(_) | LabError::Config { .. } | LabError::UnknownPreset { .. } => 2,
            _ => 1,
        }
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> LabError {
    let path = path.into();
    move |source| LabError::Io { path, source }
}

pub type LabResult<T> = std::result::Result<T, LabError>;
