use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Variants split into two families: input that violates an operation's
/// validity window ([`Error::is_domain`]) and numerical failure of an
/// otherwise valid computation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("alpha = {alpha} is outside the validity window {window}")]
    AlphaOutOfRange { alpha: f64, window: &'static str },

    #[error("integrand returned a non-finite value at p = {abscissa}")]
    NonFiniteIntegrand { abscissa: f64 },

    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    #[error("failed to polish root #{index} of {kind}: {detail}")]
    RootPolish {
        kind: &'static str,
        index: usize,
        detail: String,
    },

    #[error("missed level: {0}")]
    MissedLevel(String),

    #[error("cutoff too small: {0}")]
    CutoffTooSmall(String),
}

impl Error {
    /// True when the error stems from an input outside an operation's domain.
    pub fn is_domain(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::AlphaOutOfRange { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
