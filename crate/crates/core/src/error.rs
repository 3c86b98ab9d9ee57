use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid interval: lower bound exceeds upper bound in component {0}")]
    InvalidInterval(usize),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("containment check indeterminate: {0}")]
    Indeterminate(String),

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("malformed file: {0}")]
    Format(String),

    #[error("invalid dictionary: {0}")]
    Dictionary(String),

    #[error("empty data: {0}")]
    EmptyData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rollout failed for trajectory {trajectory}, start column {start}, step {step}: {cause}")]
    Rollout {
        trajectory: usize,
        start: usize,
        step: usize,
        cause: Box<Error>,
    },

    #[error("simulation of trajectory {trajectory} failed at step {step}: {cause}")]
    Simulation {
        trajectory: usize,
        step: usize,
        cause: Box<Error>,
    },

    #[error("reachability failed at step {step}: {cause}")]
    ReachStep { step: usize, cause: Box<Error> },

    #[error("{branch} pipeline failed: {cause}")]
    Pipeline { branch: String, cause: Box<Error> },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by malformed input rather than failed computation.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Dimension(_)
            | Error::InvalidInterval(_)
            | Error::Parse { .. }
            | Error::Format(_)
            | Error::Dictionary(_)
            | Error::EmptyData(_)
            | Error::InvalidArgument(_)
            | Error::Unknown { .. }
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => true,
            Error::Domain(_)
            | Error::Indeterminate(_)
            | Error::Rollout { .. }
            | Error::Simulation { .. }
            | Error::ReachStep { .. } => false,
            Error::Pipeline { cause, .. } => cause.is_input_error(),
        }
    }
}
