use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A model parameter is outside its admissible domain.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// The exact chain solver refuses systems above its documented size.
    #[error("chain too large: N = {n} exceeds the oracle limit of {limit}")]
    Size { n: usize, limit: usize },

    /// Experiment configuration problem; `path` names the offending field.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    /// A simulation reached a state that violates a model invariant.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter { name, reason: reason.into() }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }
}
