use thiserror::Error;

/// Errors produced by the simulation and calculus routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what} = {value} exceeds the supported maximum of {max}")]
    TooLarge {
        what: &'static str,
        value: usize,
        max: usize,
    },

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("every measurement outcome fell below the probability floor")]
    DegenerateEnsemble,

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("partition does not refine the target partition")]
    NotRefinement,

    #[error("parameters lie in the excluded set: {0}")]
    ExcludedParameters(String),

    #[error("no crossing: {0}")]
    NoCrossing(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
