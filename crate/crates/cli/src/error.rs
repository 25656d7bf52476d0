use foult::FoultError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("cannot write `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical failure: {0}")]
    Numerical(FoultError),

    #[error("check failed: {0}")]
    Check(String),
}

impl CliError {
    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// Attributes a library error to the config key that fed it. Numerical
    /// failures keep their own category.
    pub fn from_library(key: &str, e: FoultError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::config(key, e.to_string())
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Io { .. } => 1,
            CliError::Numerical(_) => 2,
            CliError::Check(_) => 3,
        }
    }
}
