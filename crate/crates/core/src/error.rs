use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },

    #[error("invalid record: {0}")]
    Invalid(String),

    #[error("cannot read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot build an index over an empty corpus")]
    EmptyCorpus,

    #[error("n-gram order must be at least 1")]
    ZeroNgramOrder,

    #[error("unknown bias type `{0}`")]
    UnknownBiasType(String),

    #[error("empty query: the question and answer contain no content words and no entities")]
    EmptyQuery,

    #[error("search provider failed for query {query:?}: {message}")]
    Provider { query: Vec<String>, message: String },

    #[error("training data must contain both classes")]
    SingleClass,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("length mismatch: {left} predictions vs {right} labels")]
    LengthMismatch { left: usize, right: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("xml error at byte {offset}: {message}")]
    Xml { offset: usize, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
