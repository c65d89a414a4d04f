use std::path::PathBuf;

use thiserror::Error;

/// What went wrong on a particular line of an input TSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseIssue {
    ColumnCount { expected: usize, found: usize },
    BadNumber(String),
    EmptyName,
    DuplicateId(usize),
    NonContiguousId { expected: usize, found: usize },
    DanglingEntity(usize),
    DanglingRelation(usize),
}

impl std::fmt::Display for ParseIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseIssue::ColumnCount { expected, found } => {
                write!(f, "expected {expected} tab-separated columns, found {found}")
            }
            ParseIssue::BadNumber(s) => write!(f, "invalid number {s:?}"),
            ParseIssue::EmptyName => write!(f, "name is empty"),
            ParseIssue::DuplicateId(id) => write!(f, "duplicate id {id}"),
            ParseIssue::NonContiguousId { expected, found } => {
                write!(f, "ids must be contiguous: expected {expected}, found {found}")
            }
            ParseIssue::DanglingEntity(id) => write!(f, "unknown entity id {id}"),
            ParseIssue::DanglingRelation(id) => write!(f, "unknown relation id {id}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}:{line}: {issue}", file.display())]
    Parse {
        file: PathBuf,
        line: usize,
        issue: ParseIssue,
    },

    #[error("no such {what}: {id}")]
    Lookup { what: &'static str, id: usize },

    #[error("cannot template triplet {triplet}: {reason}")]
    Template { triplet: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("encoder request failed{}: {message}", status.map(|s| format!(" (HTTP {s})")).unwrap_or_default())]
    Encoder { status: Option<u16>, message: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("corrupt cache record for key {key}: {reason}")]
    Cache { key: String, reason: String },

    #[error("prompt error: {0}")]
    Prompt(String),

    #[error("LLM backend failed{}: {message}", status.map(|s| format!(" (HTTP {s})")).unwrap_or_default())]
    Backend { status: Option<u16>, message: String },

    #[error("LLM returned an empty completion for node {node}")]
    EmptyGeneration { node: usize },

    #[error("training diverged: {0}")]
    Training(String),

    #[error("learning-rate search failed: {0}")]
    Search(String),

    #[error("pipeline stage `{stage}` is missing: {message}")]
    Pipeline { stage: String, message: String },

    #[error("invalid file format: {0}")]
    Format(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
