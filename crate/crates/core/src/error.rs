use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid power delay profile: {0}")]
    InvalidProfile(String),

    #[error("invalid fading spec: {0}")]
    InvalidFading(String),

    #[error("invalid link parameter: {0}")]
    InvalidLink(String),

    #[error("invalid CQI table: {0}")]
    InvalidCqiTable(String),

    #[error("scheduler configuration: {0}")]
    SchedulerConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("scenario: {key}: {reason}")]
    Scenario { key: String, reason: String },

    #[error("quadrature did not converge (estimated error {error_estimate:.3e})")]
    Quadrature { error_estimate: f64 },

    #[error("FTGS solver did not converge after {iterations} iterations (max residual {max_residual:.3e})")]
    SolverDivergence {
        iterations: usize,
        max_residual: f64,
        residuals: Vec<f64>,
    },

    #[error("service-time model inconsistent: {0}")]
    ModelInconsistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of a numerical routine, as opposed to bad input or
    /// configuration.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::SolverDivergence { .. }
                | Error::ModelInconsistency(_)
        )
    }

    pub(crate) fn scenario(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Scenario {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
