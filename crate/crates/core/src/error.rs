use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("odd degree sum {0}: a perfect matching needs an even number of half-edges")]
    Parity(u64),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("structure error: {0}")]
    Structure(String),

    #[error("rejection cap exceeded: {0}")]
    Rejection(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("kernel has no edges")]
    EmptyKernel,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("replica {index}: {source}")]
    Replica {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
