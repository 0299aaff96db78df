use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed word: {0}")]
    MalformedWord(String),

    #[error("resource cap exceeded: {what} (cap {cap})")]
    Resource { what: &'static str, cap: usize },

    #[error("unsupported by this backend: {0}")]
    Capability(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A stored witness failed re-verification. This is a defect, never an
    /// expected outcome.
    #[error("witness verification failed: {0}")]
    Witness(String),
}

impl Error {
    /// Short machine-readable tag, used in CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MalformedWord(_) => "malformed-word",
            Error::Resource { .. } => "resource",
            Error::Capability(_) => "capability",
            Error::Precondition(_) => "precondition",
            Error::Config(_) => "config",
            Error::Witness(_) => "witness",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
