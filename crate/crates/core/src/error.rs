use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown institution: {0}")]
    UnknownInstitution(String),

    #[error("unknown author: {0}")]
    UnknownAuthor(String),

    #[error("registry error: {0}")]
    Registry(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("invalid generator spec: {}", .0.join("; "))]
    InvalidSpec(Vec<String>),

    #[error("corpus has no records in boundary year {0}")]
    MissingYear(i32),

    #[error("groups overlap on: {}", .0.join(", "))]
    OverlappingGroups(Vec<String>),

    #[error("unsupported format `{given}` (supported: {})", .supported.join(", "))]
    UnsupportedFormat {
        given: String,
        supported: Vec<&'static str>,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
