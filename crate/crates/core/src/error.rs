use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("shape mismatch: expected {expected} samples, found {found}")]
    Shape { expected: usize, found: usize },

    /// A density went negative; in a solver context this is a positivity failure.
    #[error("negative density in reaction term: u = {u}, v = {v}")]
    NegativeDensity { u: f64, v: f64 },

    #[error("parameters outside the required regime: {0}")]
    Regime(String),

    #[error("eigen iteration did not converge after {iterations} iterations (last change {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("grid spacing {spacing} does not resolve kernel radius {radius}")]
    Resolution { spacing: f64, radius: f64 },

    #[error("no critical length: a = {a} >= d1 = {d1}, the principal eigenvalue never changes sign")]
    NoRoot { d1: f64, a: f64 },

    #[error("no sign change of the principal eigenvalue below ell_max = {ell_max}")]
    SearchRange { ell_max: f64 },

    #[error("degenerate domain: g = {g}, h = {h}")]
    DegenerateDomain { g: f64, h: f64 },

    #[error("numerical blow-up: {0}")]
    NumericalBlowup(String),

    #[error("time step {dt:e} exceeds stability limit {limit:e} at t = {t}")]
    Stability { dt: f64, limit: f64, t: f64 },

    #[error("solver failure at t = {t}: {reason}")]
    SolverFailure {
        t: f64,
        reason: String,
        state: Option<Box<crate::solver::State>>,
    },

    #[error("linear algebra breakdown: {0}")]
    LinearAlgebra(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// True for errors raised while integrating a trajectory.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::SolverFailure { .. }
                | Error::Stability { .. }
                | Error::NumericalBlowup(_)
                | Error::LinearAlgebra(_)
                | Error::NegativeDensity { .. }
                | Error::DegenerateDomain { .. }
        )
    }
}

pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be > 0, got {value}")))
    }
}
