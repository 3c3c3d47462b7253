use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("point set is empty")]
    EmptyPointSet,

    #[error("duplicate nodes: min pairwise distance {min_dist:.3e} is below {tol:.1e}")]
    DuplicatePoints { min_dist: f64, tol: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("smoothness parameter must exceed 1/2, got {0}")]
    InvalidAlpha(f64),

    #[error("coordinate weights must be positive and finite, got {0}")]
    InvalidWeight(f64),

    #[error(
        "series tolerance {tol:.1e} would need ~{needed:.1e} terms (cap {cap:.1e}); \
         loosen the tolerance or increase the smoothness parameter"
    )]
    ToleranceUnreachable { tol: f64, needed: f64, cap: f64 },

    #[error("truncation radius {truncation} is smaller than the coefficient support radius {support}")]
    TruncationTooSmall { truncation: u64, support: u64 },

    #[error("imaginary residue {0:.3e} exceeds tolerance; result is not real-valued")]
    ImaginaryResidue(f64),

    #[error("kernel mismatch: {0} vs {1}")]
    KernelMismatch(String, String),

    #[error("linear solve failed: {0}")]
    SolveFailure(String),

    #[error("point set is not unisolvent for polynomials of degree < {order}")]
    NotUnisolvent { order: usize },

    #[error("coefficients violate the moment conditions: residual {residual:.3e} > {tol:.3e}")]
    MomentViolation { residual: f64, tol: f64 },

    #[error(
        "squared-error routes disagree: pythagoras {pythagoras:.6e} vs direct {direct:.6e} \
         (allowed {tol:.1e} relative)"
    )]
    PythagorasMismatch { pythagoras: f64, direct: f64, tol: f64 },

    #[error("degenerate rate fit: {0}")]
    DegenerateFit(String),

    #[error("norm in the smoother space diverges for this function")]
    UnboundedB,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("incompatible study reports: {0}")]
    IncompatibleReports(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
