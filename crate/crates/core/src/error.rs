use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {field}: {constraint}")]
    Config {
        field: &'static str,
        constraint: String,
    },

    #[error("failed to parse config {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("degenerate input: sample variance {variance:e} below threshold")]
    Degenerate { variance: f64 },

    #[error("log-det leakage path limited to {cap} rows, got {rows}; use leakage_eigen")]
    LeakageSize { rows: usize, cap: usize },

    #[error("trial {trial_id}: {source}")]
    Trial {
        trial_id: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(field: &'static str, constraint: impl Into<String>) -> Self {
        Error::Config {
            field,
            constraint: constraint.into(),
        }
    }

    pub(crate) fn dim(context: &'static str, expected: usize, actual: usize) -> Self {
        Error::Dimension {
            context,
            expected,
            actual,
        }
    }

    /// Process exit code for the CLI: 2 for configuration problems, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::ConfigParse { .. } => 2,
            Error::Io { .. } | Error::Csv { .. } => 3,
            Error::Trial { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}

pub(crate) fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::dim(context, expected, actual))
    }
}
