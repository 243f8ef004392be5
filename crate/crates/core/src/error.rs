use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain of a function (e.g. a Hankel function at 0).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature budget of {budget} evaluations exceeded (error estimate {error_estimate:.3e})")]
    BudgetExceeded { budget: usize, error_estimate: f64 },

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    #[error("inadmissible perturbation: {0}")]
    InadmissiblePerturbation(String),

    #[error("grid resolution too coarse: {0}")]
    ResolutionTooCoarse(String),

    #[error("precondition violated: {0}")]
    PrecondViolated(String),

    #[error("iteration not contractive after {iterations} iterations (relative residual {residual:.3e})")]
    NotContractive { iterations: usize, residual: f64 },

    #[error("no transmission eigenvalue below k = {k_max}")]
    NoneFound { k_max: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than numerical trouble.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Json(_) | Error::Domain(_) | Error::InadmissiblePerturbation(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
