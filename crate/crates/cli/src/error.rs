use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] tucker_als::Error),

    #[error("CSV output to {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl CliError {
    /// 1 usage, 2 format or I/O, 3 numerical.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Csv { .. } => 2,
            CliError::Core(e) if e.is_io_or_format() => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
