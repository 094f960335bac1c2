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

    #[error("{path}: line {line}: {message}")]
    Csv {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        path: PathBuf,
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("column `{0}` not found")]
    MissingColumn(String),

    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),

    #[error("column `{0}` has no finite values to average")]
    NoFiniteValues(String),

    #[error("column layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("class `{class}`: requested {requested} rows but only {available} available")]
    InsufficientClassRows {
        class: String,
        requested: usize,
        available: usize,
    },

    #[error("class code {class} has {rows} rows, fewer than the {k} folds requested")]
    TooFewForFolds { class: usize, rows: usize, k: usize },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("class code {code} out of range for {n_classes} classes")]
    CodeOutOfRange { code: usize, n_classes: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("output directory {0} is locked by another run")]
    Locked(PathBuf),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the run description rather than by the data.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Locked(_))
    }
}
