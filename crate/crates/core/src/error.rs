use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the region where the requested object exists.
    #[error("domain violation: {0}")]
    Domain(String),

    /// The period equation has no root for the requested parameters.
    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("rank-deficient constraint set: {0}")]
    RankDeficient(String),

    /// Numerical result did not converge under refinement.
    #[error("accuracy: {0}")]
    Accuracy(String),

    #[error("solution blew up at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
