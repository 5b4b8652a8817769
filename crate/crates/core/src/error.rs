use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is missing, malformed or out of range. `field`
    /// is the dotted path of the offending key.
    #[error("invalid configuration at `{field}`: {msg}")]
    Config { field: String, msg: String },

    /// A caller broke an API precondition (dead UAV acting, shape mismatch, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Input outside the mathematical domain of a model equation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Training produced a non-finite value.
    #[error("numerical divergence: {0}")]
    Divergence(String),

    #[error("checkpoint {path}: {msg}")]
    Checkpoint { path: PathBuf, msg: String },

    #[error("refusing to aggregate outputs from different configurations ({0} vs {1})")]
    MixedConfig(String, String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            msg: msg.into(),
        }
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
