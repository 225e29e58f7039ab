use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("point {point:?} is outside the domain: {reason}")]
    Domain { point: Vec<f64>, reason: String },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("gradient vanishes, direction is undefined")]
    UndefinedDirection,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("spectrum structure: {0}")]
    Structure(String),

    #[error("contradiction: {0}")]
    Contradiction(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(point: &[f64], reason: impl Into<String>) -> Self {
        Error::Domain {
            point: point.to_vec(),
            reason: reason.into(),
        }
    }
}
