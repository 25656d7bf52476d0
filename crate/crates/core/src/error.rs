use thiserror::Error;

/// Errors raised by the simulation and estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FoultError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("time {t} exceeds the grid horizon {horizon}")]
    BeyondHorizon { t: f64, horizon: f64 },

    #[error("increment {h} is not a multiple of the grid step {step}")]
    NotGridAligned { h: f64, step: f64 },

    #[error("circulant embedding has a negative eigenvalue {value:e} (max {max:e})")]
    CirculantNotPositive { value: f64, max: f64 },

    #[error("covariance matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error(
        "quadrature did not converge: estimated error {error:e} exceeds tolerance {tolerance:e}"
    )]
    QuadratureFailure { error: f64, tolerance: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenFailure { sweeps: usize, off_norm: f64 },

    #[error("covariance matrix fails the PSD check: eigenvalue {eigenvalue:e} below {floor:e}")]
    NotPositiveSemidefinite { eigenvalue: f64, floor: f64 },

    #[error("derivative order {order} exceeds the cap of {cap}")]
    OrderTooLarge { order: usize, cap: usize },

    #[error("only {surviving} regression points survive the degeneracy filter (need 3)")]
    DegenerateRegression { surviving: usize },

    #[error("spatial lattice does not cover [{need_lo}, {need_hi}] with spacing <= {max_spacing}")]
    LatticeCoverage {
        need_lo: f64,
        need_hi: f64,
        max_spacing: f64,
    },
}

impl FoultError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        FoultError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical routine (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            FoultError::CirculantNotPositive { .. }
                | FoultError::NotPositiveDefinite { .. }
                | FoultError::QuadratureFailure { .. }
                | FoultError::EigenFailure { .. }
                | FoultError::NotPositiveSemidefinite { .. }
                | FoultError::DegenerateRegression { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, FoultError>;
