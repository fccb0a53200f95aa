use thiserror::Error;

/// Errors produced by the estimators, models and simulation harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A group has fewer than two observations, or the grouping is otherwise malformed.
    #[error("assumption violation: {0}")]
    Assumption(String),

    /// The requested group design does not exist for the given sample size.
    #[error("inadmissible design: {message}")]
    Design {
        message: String,
        /// Admissible sample sizes closest to the requested one.
        nearest: Vec<usize>,
    },

    /// A root could not be bracketed.
    #[error("bracketing failed: {0}")]
    Bracketing(String),

    /// Any other numerical breakdown (non-finite intermediate values and the like).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The worker pool could not be started.
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl Error {
    /// True for errors caused by invalid input, as opposed to numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Assumption(_) | Error::Design { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_open_unit(name: &str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in (0, 1), got {p}")))
    }
}
