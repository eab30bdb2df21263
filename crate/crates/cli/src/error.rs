use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_IO: i32 = 2;
pub const EXIT_ARGUMENT: i32 = 3;
pub const EXIT_DIVERGENCE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        source: stereo_decorr::Error,
    },
    #[error("{path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Core(#[from] stereo_decorr::Error),
    #[error("{0}")]
    Argument(String),
    #[error("writing report: {0}")]
    Report(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use stereo_decorr::Error as E;
        match self {
            CliError::Input { .. } | CliError::Output { .. } | CliError::Report(_) => EXIT_IO,
            CliError::Argument(_) => EXIT_ARGUMENT,
            CliError::Core(e) => match e {
                E::Divergence { .. } | E::NonFinite(_) => EXIT_DIVERGENCE,
                E::Io(_)
                | E::UnsupportedFormat(_)
                | E::CorruptHeader(_)
                | E::LengthMismatch(..)
                | E::SampleRateMismatch(..)
                | E::ChannelCount { .. }
                | E::TooShort { .. } => EXIT_IO,
                _ => EXIT_ARGUMENT,
            },
        }
    }
}
