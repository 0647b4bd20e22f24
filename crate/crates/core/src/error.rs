use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("dataset path {0} does not exist")]
    MissingPath(PathBuf),

    #[error("dataset not found at {path}; expected {expected}")]
    MissingDataset { path: PathBuf, expected: String },

    #[error("{0} contains no class subdirectories with files")]
    NoClassDirectories(PathBuf),

    #[error("{path}:{line}: malformed record: {message}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: record is missing field `{field}`")]
    MissingField {
        path: PathBuf,
        line: usize,
        field: String,
    },

    #[error("duplicate document id `{0}`")]
    DuplicateId(String),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("class `{class}` has {count} document(s); stratified splitting needs at least 2")]
    ClassTooSmall { class: String, count: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty vocabulary after pruning (min_df={min_df}, max_df_ratio={max_df_ratio}, {n_documents} documents)")]
    EmptyVocabulary {
        min_df: u32,
        max_df_ratio: f64,
        n_documents: usize,
    },

    #[error("no training documents")]
    NoTrainingDocuments,

    #[error("training labels contain a single class; both signs are required")]
    SingleClass,

    #[error("need at least 2 distinct classes, found {0}")]
    TooFewClasses(usize),

    #[error("feature index {index} out of range for dimension {dim}")]
    DimensionMismatch { index: usize, dim: usize },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("infeasible dual variables: {0}")]
    InfeasibleDual(String),

    #[error("label `{0}` is not one of the model's classes")]
    UnknownLabel(String),

    #[error("test corpus is empty")]
    EmptyTestCorpus,

    #[error("unsupported model format version {found} (this build reads version {expected})")]
    FormatVersion { found: u64, expected: u64 },

    #[error("model file is corrupt: {0}")]
    CorruptModel(String),

    #[error("serialization failed: {0}")]
    Serialization(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
