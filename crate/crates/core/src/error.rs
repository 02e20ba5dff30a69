// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("model parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("row {row} of {what} sums to {sum} (tolerance {tol})")]
    RowSum {
        what: &'static str,
        row: usize,
        sum: f64,
        tol: f64,
    },

    #[error("discount factor {0} outside [0, 1)")]
    Discount(f64),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("singular linear system")]
    Singular,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Stable machine-readable category used by the CLI.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse(_) | Error::Dimension(_) | Error::RowSum { .. } | Error::Discount(_) => {
                "model"
            }
            Error::Range(_) | Error::InvalidArgument(_) => "argument",
            Error::Singular => "numeric",
        }
    }
}
