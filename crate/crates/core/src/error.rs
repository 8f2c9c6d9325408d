use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the tensor, kernel and decomposition routines.
///
/// Modes carried in variants are 1-based, matching how users name them on
/// the command line.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mode {mode} for a tensor of order {order}")]
    InvalidMode { mode: usize, order: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("reference tensor has zero Frobenius norm")]
    ZeroReference,

    #[error("Gram matrix is numerically singular (pivot {pivot:e} at column {column}, max diagonal {max_diag:e})")]
    SingularGram {
        column: usize,
        pivot: f64,
        max_diag: f64,
    },

    #[error("{routine} did not converge within {limit} iterations")]
    NoConvergence { routine: &'static str, limit: usize },

    #[error("mode {mode}: rank {rank} exceeds the numerical rank of the unfolding ({detail})")]
    RankTooLarge {
        mode: usize,
        rank: usize,
        detail: String,
    },

    #[error("mode {mode}: randomized range initialization collapsed (QR diagonal {min_diag:e} vs max {max_diag:e})")]
    DegenerateInit {
        mode: usize,
        min_diag: f64,
        max_diag: f64,
    },

    #[error("mode {mode}: {source}")]
    InMode {
        mode: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Tag an error with the mode it occurred in, unless it already names one.
    pub fn in_mode(self, mode: usize) -> Error {
        match self {
            e @ (Error::RankTooLarge { .. }
            | Error::DegenerateInit { .. }
            | Error::InMode { .. }
            | Error::InvalidMode { .. }) => e,
            other => Error::InMode {
                mode,
                source: Box::new(other),
            },
        }
    }

    /// The innermost error, with mode tags peeled off.
    pub fn root(&self) -> &Error {
        match self {
            Error::InMode { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures of the numerics rather than of the inputs or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::SingularGram { .. }
                | Error::NoConvergence { .. }
                | Error::RankTooLarge { .. }
                | Error::DegenerateInit { .. }
        )
    }

    pub fn is_io_or_format(&self) -> bool {
        matches!(self.root(), Error::Io { .. } | Error::Format(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
