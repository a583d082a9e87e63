use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("arm {arm} outside 1..={num_arms}")]
    ArmOutOfRange { arm: usize, num_arms: usize },

    #[error("slot {t} outside 1..={horizon}")]
    SlotOutOfRange { t: usize, horizon: usize },

    #[error("expected {expected} items, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("need at least {needed} strictly positive weights, found {found}")]
    InsufficientWeights { needed: usize, found: usize },

    #[error("weights must be nonnegative (index {index} is {value})")]
    NegativeWeight { index: usize, value: f64 },

    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },

    #[error("{}", format_issues(.0))]
    Config(Vec<crate::cli::ConfigIssue>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed input: {0}")]
    Malformed(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn format_issues(issues: &[crate::cli::ConfigIssue]) -> String {
    issues
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
