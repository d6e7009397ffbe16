use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid input: out-of-range site, bad list length, r >= 1, etc.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A quantity is undefined at the requested point (g = 0 in the
    /// commensurability ratio, unsolvable inversion).
    #[error("domain error: {0}")]
    Domain(String),

    /// Norm drift, eigensolver residual or a failed unitarity/hermiticity check.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("sweep failed at value {value}: {source}")]
    SweepRow {
        value: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures caused by the caller's input rather than by arithmetic.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::Parameter(_) | Error::Domain(_) => true,
            Error::SweepRow { source, .. } => source.is_usage(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
