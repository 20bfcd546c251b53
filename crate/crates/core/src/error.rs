use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared across the library.
///
/// Callers that drive the engine interactively should treat `Protocol` as a
/// misuse of the ask/tell contract (the state is left unchanged) and
/// `Evaluator` as a failure of the black-box function being designed for.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("{0} must not be empty")]
    EmptyInput(&'static str),

    #[error("invalid argument: {0}")]
    BadArgument(String),

    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownName {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("evaluator failed: {0}")]
    Evaluator(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn bad_argument(msg: impl Into<String>) -> Self {
        Error::BadArgument(msg.into())
    }
}
