use thiserror::Error;

/// Errors produced by the link models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of the model.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature or root search failed to reach its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The weak-turbulence expansion produced an unphysical beam.
    #[error("turbulence regime violation: {0}")]
    Regime(String),

    /// The Weibull-shaped fading fit cannot be formed.
    #[error("degenerate fading fit: {0}")]
    Degenerate(String),

    /// A configuration key is missing, unknown or malformed.
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
