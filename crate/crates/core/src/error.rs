use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    /// A scalar function produced a non-finite value, or was queried outside `(0, inf)`.
    #[error("{function} is undefined at {at:e}")]
    Domain { function: String, at: f64 },

    #[error("conjugate search for {function} at t = {t:e} ran off the {edge} edge of the bracket")]
    Bracket {
        function: String,
        t: f64,
        edge: &'static str,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("functional evaluation failed on trial {trial}: {source}")]
    Trial {
        trial: usize,
        witness: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
