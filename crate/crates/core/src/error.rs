use std::path::PathBuf;

use thiserror::Error;

/// Which of the two data channels an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    X,
    Y,
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Channel::X => f.write_str("x"),
            Channel::Y => f.write_str("y"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("SVD did not converge for a {rows}x{cols} matrix")]
    SvdFailed { rows: usize, cols: usize },

    #[error("eigendecomposition did not converge for a {dim}x{dim} matrix")]
    EigenFailed { dim: usize },

    #[error("sample covariance of channel {channel} is singular (condition number {condition:.3e})")]
    SingularCovariance { channel: Channel, condition: f64 },

    #[error("degenerate statistic: canonical correlation {index} is zero but s = {s}")]
    DegenerateStatistic { index: usize, s: usize },

    #[error("correction factor {factor} is not positive (M = {samples}, s = {s}); too few samples")]
    SampleSize { factor: f64, samples: usize, s: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::Config(_)
            | Error::Io { .. }
            | Error::Parse { .. } => 2,
            _ => 3,
        }
    }

    /// True for per-pair failures that a rank scan may skip.
    pub fn is_degenerate_statistic(&self) -> bool {
        matches!(self, Error::DegenerateStatistic { .. } | Error::SampleSize { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
