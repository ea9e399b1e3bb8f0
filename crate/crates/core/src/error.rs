use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("unknown entity id `{0}`")]
    UnknownEntity(String),

    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),

    #[error("predicate `{predicate}` does not accept {subject} -> {object}")]
    TypeViolation {
        predicate: String,
        subject: String,
        object: String,
    },

    #[error("invalid document at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("relation endpoint `{id}` at {path} does not name an entity")]
    DanglingEndpoint { path: String, id: String },

    #[error("invalid chart spec: {0}")]
    InvalidSpec(String),

    #[error("text `{text}` ({width}px) does not fit the canvas")]
    TextTooWide { text: String, width: u32 },

    #[error("no classification rule matched the chart image")]
    UnclassifiableChart,

    #[error("no graphical marks detected")]
    EmptyChart,

    #[error("series {0} has fewer than two colored columns")]
    DegenerateSeries(String),

    #[error("pie region holds fewer than two slice colors")]
    DegenerateChart,

    #[error("malformed chart: {0}")]
    MalformedChart(String),

    #[error("unsupported question: {0}")]
    UnsupportedQuestion(String),

    #[error("entity not found: {0}")]
    EntityNotFound(String),

    #[error("incomplete graph: {0}")]
    IncompleteGraph(String),

    #[error("nothing to score")]
    NothingToScore,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("image decoding failed: {0}")]
    Image(String),

    #[error("external backend failed: {0}")]
    Backend(String),

    #[error("{path}: {source}")]
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

    /// Short machine-readable tag used in error logs.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation(_) => "Validation",
            Error::UnknownEntity(_) => "UnknownEntity",
            Error::UnknownPredicate(_) => "UnknownPredicate",
            Error::TypeViolation { .. } => "TypeViolation",
            Error::Schema { .. } => "Schema",
            Error::DanglingEndpoint { .. } => "DanglingEndpoint",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::TextTooWide { .. } => "TextTooWide",
            Error::UnclassifiableChart => "UnclassifiableChart",
            Error::EmptyChart => "EmptyChart",
            Error::DegenerateSeries(_) => "DegenerateSeries",
            Error::DegenerateChart => "DegenerateChart",
            Error::MalformedChart(_) => "MalformedChart",
            Error::UnsupportedQuestion(_) => "UnsupportedQuestion",
            Error::EntityNotFound(_) => "EntityNotFound",
            Error::IncompleteGraph(_) => "IncompleteGraph",
            Error::NothingToScore => "NothingToScore",
            Error::Config(_) => "Config",
            Error::Image(_) => "Image",
            Error::Backend(_) => "Backend",
            Error::Io { .. } => "Io",
            Error::Json(_) => "Json",
        }
    }

    /// Domain errors describe a chart or question the pipeline could not
    /// handle, as opposed to bad invocation or unreadable input.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::UnclassifiableChart
                | Error::EmptyChart
                | Error::DegenerateSeries(_)
                | Error::DegenerateChart
                | Error::MalformedChart(_)
                | Error::UnsupportedQuestion(_)
                | Error::EntityNotFound(_)
                | Error::IncompleteGraph(_)
                | Error::NothingToScore
                | Error::Backend(_)
        )
    }
}
