use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("covariance is not embeddable: min eigenvalue {min_eigenvalue:e} below -{tolerance:e} at embedding length {length}")]
    NonEmbeddable {
        min_eigenvalue: f64,
        tolerance: f64,
        length: usize,
    },

    #[error("grid spacing {spacing} is not an integer multiple of mesh spacing {mesh}")]
    GridMeshMismatch { spacing: f64, mesh: f64 },

    #[error("horizon T={horizon} too short: ln T must exceed max r_kk = {max_r}")]
    InvalidHorizon { horizon: f64, max_r: f64 },

    #[error("mixing covariance is not positive semi-definite (pivot {pivot:e} at index {index})")]
    NonPsd { index: usize, pivot: f64 },

    #[error("D1 and D2 must differ (both {0})")]
    EqualSpacings(f64),

    #[error("grid cannot be classified: {0}")]
    UnclassifiableGrid(String),

    #[error("missing constant: {0}")]
    MissingConstant(String),

    #[error("only {observed} exceedance events observed, need at least {required}")]
    InsufficientExceedances { observed: usize, required: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("malformed report: {0}")]
    MalformedReport(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::NonEmbeddable { .. } => "NonEmbeddable",
            Error::GridMeshMismatch { .. } => "GridMeshMismatch",
            Error::InvalidHorizon { .. } => "InvalidHorizon",
            Error::NonPsd { .. } => "NonPSD",
            Error::EqualSpacings(_) => "EqualSpacings",
            Error::UnclassifiableGrid(_) => "UnclassifiableGrid",
            Error::MissingConstant(_) => "MissingConstant",
            Error::InsufficientExceedances { .. } => "InsufficientExceedances",
            Error::Precondition(_) => "Precondition",
            Error::ConfigMismatch(_) => "ConfigMismatch",
            Error::MalformedReport(_) => "MalformedReport",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
