use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: field `{field}`: {message}")]
    Record {
        line: usize,
        field: String,
        message: String,
    },

    #[error("duplicate example id `{0}`")]
    DuplicateId(String),

    #[error("no sidecar annotation for {0}")]
    MissingAnnotation(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("idf corpus is empty")]
    EmptyCorpus,

    #[error("mention {mention} out of bounds for segment of {len} tokens (snippet rank {rank})")]
    MentionOutOfBounds {
        mention: String,
        len: usize,
        rank: u32,
    },

    #[error("unknown feature template `{name}`; valid templates: {valid}")]
    UnknownTemplate { name: String, valid: String },

    #[error("example `{0}` has no candidate matching a gold answer")]
    NoGoldCandidate(String),

    #[error("non-finite objective at example `{0}`")]
    NonFinite(String),

    #[error("model format version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("malformed {what}: {message}")]
    Format { what: &'static str, message: String },

    #[error("empty candidate list")]
    NoCandidates,

    #[error("prediction/example id mismatch: `{prediction}` vs `{example}`")]
    IdMismatch { prediction: String, example: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Search(#[from] crate::websearch::SearchError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(what: &'static str, message: impl ToString) -> Self {
        Error::Format {
            what,
            message: message.to_string(),
        }
    }
}
