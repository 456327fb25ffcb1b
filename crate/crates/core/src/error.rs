use thiserror::Error;

/// Failures surfaced by the numerical kernels.
///
/// Variant names follow the error tags used in reports and CLI output
/// (see [`Error::tag`]).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("analytic volume unavailable for {0}")]
    AnalyticUnavailable(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("frame is not orthonormal (Gram deviation {0:.3e})")]
    BadFrame(f64),
    #[error("harmonic expansion contains odd-degree coefficients")]
    NotEven,
    #[error("zero cosine-transform multiplier at degree {0}")]
    NotInRange(usize),
    #[error("body is not smooth: {0}")]
    NotSmooth(String),
    #[error("region is empty or degenerate: {0}")]
    EmptyRegion(String),
    #[error("degenerate function space: gram min/max eigenvalue ratio {0:.3e}")]
    DegenerateSpace(f64),
    #[error("evaluation functionals vanish at node {node} (|phi| = {norm:.3e})")]
    ValueConditionViolated { node: usize, norm: f64 },
    #[error("eigenvalue must be positive, got {0}")]
    BadEigenvalue(f64),
    #[error("inputs are not invariant: {0}")]
    NotInvariant(String),
    #[error("zero-count oracle unreliable: suspect rate {rate:.3} exceeds {limit:.3}")]
    UnreliableOracle { rate: f64, limit: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Short machine-readable tag.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::AnalyticUnavailable(_) => "analytic-unavailable",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::BadFrame(_) => "bad-frame",
            Error::NotEven => "not-even",
            Error::NotInRange(_) => "not-in-range",
            Error::NotSmooth(_) => "not-smooth",
            Error::EmptyRegion(_) => "empty-region",
            Error::DegenerateSpace(_) => "degenerate-space",
            Error::ValueConditionViolated { .. } => "value-condition-violated",
            Error::BadEigenvalue(_) => "bad-eigenvalue",
            Error::NotInvariant(_) => "not-invariant",
            Error::UnreliableOracle { .. } => "unreliable-oracle",
            Error::Unsupported(_) => "unsupported",
            Error::InvalidInput(_) => "invalid-input",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
