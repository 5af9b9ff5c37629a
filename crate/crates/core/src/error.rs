use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("space mismatch: expected {expected}, found {found}")]
    SpaceMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("singular point: {0}")]
    Singular(String),
    #[error("series error: {0}")]
    Series(String),
    #[error("vanishing first moment ({0:e})")]
    VanishingFirstMoment(f64),
    #[error("logarithm branch failure: {0}")]
    Branch(String),
    #[error("malformed schedule: {0}")]
    Schedule(String),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("order {0} exceeds the enumeration limit")]
    OrderTooLarge(usize),
    #[error("monte carlo configuration: {0}")]
    MonteCarlo(String),
    #[error("json: {0}")]
    Json(String),
}

impl Error {
    /// Validation failures map to exit code 2 in the CLI, numerical ones to 1.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidMeasure(_)
                | Error::SpaceMismatch { .. }
                | Error::Domain(_)
                | Error::Schedule(_)
                | Error::Params(_)
                | Error::OrderTooLarge(_)
                | Error::MonteCarlo(_)
                | Error::Json(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
