use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The point is too far from the moving set for the projection to be unique.
    #[error(
        "point at distance {distance:.3e} from C({t}) is outside the prox band (limit {limit:.3e})"
    )]
    OutOfProxBand { t: f64, distance: f64, limit: f64 },

    /// Newton iteration for a sublevel-set projection did not converge.
    #[error("projection onto sublevel boundary failed at t = {t} after {iterations} iterations (residual {residual:.3e})")]
    ProjectionFailure {
        t: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("{path}: {reason}")]
    Validation { path: String, reason: String },

    #[error("initial state is infeasible: signed distance to C(0) is {signed_distance:.6e} > 0")]
    InfeasibleInitialState { signed_distance: f64 },

    #[error("bound beta = {beta} is below the sampled max |f(x,u)| = {observed}")]
    InconsistentBound { beta: f64, observed: f64 },

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error(
        "line search failed to decrease the cost after {halvings} halvings (iteration {iteration})"
    )]
    NonDecreasingCost { iteration: usize, halvings: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. }
                | Error::InfeasibleInitialState { .. }
                | Error::InconsistentBound { .. }
                | Error::DimensionMismatch { .. }
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}
