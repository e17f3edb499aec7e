use thiserror::Error;

/// Errors produced by the stellar toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("spin labels differ: 2S = {0} vs 2S = {1}")]
    LabelMismatch(u32, u32),

    #[error("{what} out of range: {detail}")]
    Range { what: &'static str, detail: String },

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("degenerate constellation: {0}")]
    DegenerateConstellation(String),

    #[error("adaptive step collapsed to {step:e} at t = {t}")]
    StepUnderflow { t: f64, step: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn range(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Range {
            what,
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
