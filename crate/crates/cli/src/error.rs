use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("numeric error: {0}")]
    Domain(#[from] twophoton_core::Error),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(key: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }

    /// Process exit status: 2 for anything wrong with the inputs, 3 when a
    /// valid configuration runs into a numeric-domain failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(e) => e.exit_code() as u8,
            CliError::Config { .. } => 2,
            CliError::Domain(_) => 3,
            CliError::Output { .. } => 1,
        }
    }
}

/// A core constructor rejected a config value: report it against the key.
pub(crate) fn rejected(e: twophoton_core::Error) -> CliError {
    match &e {
        twophoton_core::Error::InvalidParameter { name, .. } => {
            let key = match *name {
                "t_0" => "t0_s",
                other => other,
            };
            CliError::config(key, e.to_string())
        }
        _ => CliError::Domain(e),
    }
}
