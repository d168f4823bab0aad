use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("projected cost of {projected:.3e} right-hand-side evaluations exceeds the budget of {budget:.3e} (x_max = {x_max}); lower x_max or raise --budget")]
    BudgetExceeded {
        projected: f64,
        budget: f64,
        x_max: f64,
    },

    #[error("orthonormality defect {defect:.3e} exceeded {limit:.1e} at x = {x}")]
    FrameDrift { defect: f64, limit: f64, x: f64 },

    #[error("step size underflow at x = {x} (h = {h:.3e})")]
    StepUnderflow { x: f64, h: f64 },

    #[error("eta_{j} is singular: min(1 + m_{j}) = {min:.3e} on [0, {x}]")]
    SingularEta { j: usize, min: f64, x: f64 },

    #[error("similarity variable {xi} outside the profile range [0, {x_max}]; a trace with x_max >= {xi} is required")]
    SimilarityRange { xi: f64, x_max: f64 },

    #[error("extraction error estimate {err_est:.3e} exceeds 10*tol = {limit:.3e}; truncation point {x_used} is too small")]
    DegradedAccuracy {
        err_est: f64,
        limit: f64,
        x_used: f64,
    },

    #[error("matching iteration did not contract (last change {change:.3e} after {iterations} iterations)")]
    NonContraction { change: f64, iterations: usize },

    #[error("degenerate limit vector: |B| = {norm}")]
    DegenerateGeometry { norm: f64 },

    #[error("quadrature failed to converge on [{a}, {b}] (estimate {estimate:.3e})")]
    Quadrature { a: f64, b: f64, estimate: f64 },

    #[error("wavelength under-resolved: {0}")]
    Resolution(String),
}

impl Error {
    /// True for failures of the numerics, as opposed to bad inputs.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::InvalidParameter(_) | Error::OutOfRange { .. } | Error::SimilarityRange { .. }
        )
    }
}
