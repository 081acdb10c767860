use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Core(#[from] ness_core::Error),

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),

    #[error("check failed: {0}")]
    Threshold(String),
}

impl CliError {
    /// 0 success, 1 configuration, 2 numerical failure, 3 failed check.
    pub fn exit_code(&self) -> u8 {
        use ness_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => 1,
            CliError::Threshold(_) => 3,
            CliError::Core(e) => match e {
                E::BadParams { .. }
                | E::TooLarge(_)
                | E::BadTolerance(_)
                | E::DimensionMismatch { .. }
                | E::ParamLengthMismatch { .. }
                | E::TooFewShadows { .. }
                | E::Empty(_)
                | E::WrongFrequencySet { .. } => 1,
                _ => 2,
            },
        }
    }
}
