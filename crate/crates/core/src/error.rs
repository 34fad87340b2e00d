use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A sampler, aggregator or generator parameter is out of range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Inputs are individually valid but do not fit together (dimension or id mismatch).
    #[error("input error: {0}")]
    Input(String),

    /// A preference cache is missing a required pair.
    #[error("schema error: query {query}, pair ({i},{j}) missing")]
    MissingPair { query: String, i: String, j: String },

    /// A value violates its domain (probability outside [0,1], duplicate ids, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A text file could not be parsed.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
