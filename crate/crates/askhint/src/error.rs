//! Crate-wide error type.
//!
//! Each subsystem surfaces its failures as a variant here; the CLI maps
//! variants onto exit codes (2 for input/validation problems, 3 for backend
//! failures).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    // ---- prompt pool ----
    #[error("class list is empty")]
    EmptyClassList,
    #[error("expected class {0:?} not found in model output")]
    MissingClass(String),
    #[error("class {0:?} has no questions")]
    NoQuestions(String),
    #[error("malformed pool file at line {line}: {msg}")]
    MalformedFile { line: usize, msg: String },

    // ---- compression ----
    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no embedding provided for question {0:?}")]
    MissingEmbedding(String),
    #[error("invalid clustering stop rule: {0}")]
    InvalidStop(String),
    #[error("no groups found in compact-set text")]
    NoGroupsFound,
    #[error("group {group:?} has {count} questions; summarized groups carry 2-3")]
    GroupSizeViolation { group: String, count: usize },
    #[error("subset budget {budget} out of range 1..={max}")]
    BudgetOutOfRange { budget: usize, max: usize },

    // ---- inference ----
    #[error("prompt mode {mode} cannot be rendered from a {given} set")]
    ModeSetMismatch { mode: String, given: String },
    #[error("backend error for video {video_id}: {cause}")]
    Backend { video_id: String, cause: String },

    // ---- evaluation ----
    #[error("AUC undefined: only one label class present")]
    DegenerateLabels,
    #[error("no verdict for manifest video {0:?}")]
    MissingVerdict(String),
    #[error("unknown dataset {0:?}")]
    UnknownDataset(String),
    #[error("seen-class set is empty")]
    EmptySeenSet,
    #[error("seen class {0:?} not present in manifest")]
    UnknownSeenClass(String),

    // ---- manifest / config ----
    #[error("manifest error at line {line}: {msg}")]
    Manifest { line: usize, msg: String },
    #[error("config error: {0}")]
    Config(String),

    // ---- generic plumbing ----
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Client(#[from] crate::client::ClientError),
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// CLI exit code for this error: 2 input/validation, 3 backend.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Backend { .. } | Error::Client(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
