use thiserror::Error;

/// Failures raised by the numerical pipeline.
///
/// Every variant maps to a stable name (see [`Error::name`]) which the CLI
/// prints alongside exit code 65.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("jet centers differ: {0} vs {1}")]
    CenterMismatch(f64, f64),

    #[error("division by a quantity of magnitude {0:e}, below the vanishing threshold")]
    DivisionNearZero(f64),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("jet order {have} is too low, {need} required")]
    OrderTooLow { need: usize, have: usize },

    /// Gram-Schmidt residual vanished while building frame vector `i + 1`,
    /// i.e. curvature `i` is numerically zero (index 0 means zero speed).
    #[error("Gram-Schmidt residual below tolerance: curvature {0} vanishes")]
    ResidualBelowTolerance(usize),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("frame drifted by {0:e} within one step; reduce the step size")]
    StepTooLarge(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::CenterMismatch(..) => "CenterMismatch",
            Error::DivisionNearZero(_) => "DivisionNearZero",
            Error::DomainError(_) => "DomainError",
            Error::OrderTooLow { .. } => "OrderTooLow",
            Error::ResidualBelowTolerance(_) => "ResidualBelowTolerance",
            Error::DegenerateGeometry(_) => "DegenerateGeometry",
            Error::StepTooLarge(_) => "StepTooLarge",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidSpec(_) => "InvalidSpec",
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::DomainError(msg.into())
    }

    pub(crate) fn spec(msg: impl Into<String>) -> Self {
        Error::InvalidSpec(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
