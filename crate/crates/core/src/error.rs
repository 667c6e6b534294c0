use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid design space: {0}")]
    InvalidSpace(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("grid of {size} points exceeds the cap of {cap}")]
    GridTooLarge { size: u128, cap: usize },

    #[error("response vector has zero variance")]
    ZeroVariance,

    #[error("PLS rank deficiency: requested {requested} components, only {achieved} informative")]
    RankDeficient { requested: usize, achieved: usize },

    #[error("correlation matrix is not positive definite (smallest failed pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { pivot: f64, row: usize },

    #[error("all {0} likelihood optimization starts failed")]
    FitFailed(usize),

    #[error("missing responses in design of experiments")]
    MissingResponses,

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the failure is numerical (as opposed to bad user input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::FitFailed(_)
                | Error::RankDeficient { .. }
                | Error::ZeroVariance
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
