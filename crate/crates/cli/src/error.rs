use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad invocation: exit code 1.
    #[error("usage: {0}")]
    Usage(String),
    /// Inputs that fail to load or validate: exit code 2.
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    pub fn data(msg: impl std::fmt::Display) -> Self {
        CliError::Data(msg.to_string())
    }

    pub fn at(path: &Path, msg: impl std::fmt::Display) -> Self {
        CliError::Data(format!("{}: {msg}", path.display()))
    }
}

macro_rules! data_errors {
    ($($t:ty),* $(,)?) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.to_string())
            }
        })*
    };
}

data_errors!(
    privkit_core::AnonymizeError,
    privkit_core::AssocError,
    privkit_core::DatasetError,
    privkit_core::DpError,
    privkit_core::RapporError,
    privkit_core::SmcError,
    serde_json::Error,
    std::io::Error,
);

pub type Result<T> = std::result::Result<T, CliError>;
