use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("cannot read {path}: {message}")]
    Read { path: PathBuf, message: String },

    #[error("cannot write {path}: {message}")]
    Write { path: PathBuf, message: String },

    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: quench_core::Error,
    },

    #[error("acceptance failure: {0}")]
    Acceptance(String),
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn numerical(context: impl Into<String>, source: quench_core::Error) -> Self {
        Self::Numerical {
            context: context.into(),
            source,
        }
    }

    pub fn write(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        Self::Write {
            path: path.into(),
            message: err.to_string(),
        }
    }

    /// 1 for configuration and I/O problems, 2 for numerical or acceptance failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } | Self::Read { .. } | Self::Write { .. } => 1,
            Self::Numerical { .. } | Self::Acceptance(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
