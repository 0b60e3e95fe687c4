use std::io;
use std::path::Path;

use msibm::{CodecError, ConfigError, EvalError, MatchError, PyramidError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("error: {0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Other(_) => 1,
            CliError::Config(_) => 2,
            CliError::Decode(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn io(path: &Path, e: io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    /// Decoding failure of a named file, split into I/O and format classes.
    pub fn codec(path: &Path, e: CodecError) -> Self {
        match e {
            CodecError::Io(e) => Self::io(path, e),
            other => CliError::Decode(format!("{}: {other}", path.display())),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<MatchError> for CliError {
    fn from(e: MatchError) -> Self {
        match e {
            MatchError::Config(c) | MatchError::Pyramid(PyramidError::Config(c)) => c.into(),
            MatchError::Pyramid(p @ PyramidError::TooManyLevels { .. }) => {
                CliError::Config(p.to_string())
            }
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::BadScale(_) => CliError::Config(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}
