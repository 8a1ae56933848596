use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {field}: {reason}")]
    InvalidInstance { field: String, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error in {context}: {source}")]
    Parse {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("school {school}: routing infeasible: {reason}")]
    Infeasible { school: String, reason: String },

    #[error("{what} over limit: {size} > {limit}")]
    SizeLimit {
        what: String,
        size: usize,
        limit: usize,
    },

    #[error("unassigned trip capacity of school {school} would become negative")]
    UtcUnderflow { school: String },

    #[error("school {school} was already solved")]
    AlreadySolved { school: String },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidInstance {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
