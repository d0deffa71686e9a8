use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("variable count mismatch: expected {expected}, got {got}")]
    VarCountMismatch { expected: usize, got: usize },

    #[error("truncation degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },

    #[error("component {index} has nonzero constant term {value}")]
    NonzeroConstantTerm { index: usize, value: f64 },

    #[error("non-finite coefficient {value} at {context}")]
    NonFiniteCoefficient { value: f64, context: String },

    #[error("linear part is singular (smallest singular value {sigma_min:.3e})")]
    SingularLinearPart { sigma_min: f64 },

    #[error("germ is not critical at 0: gradient norm {gradient_norm:.3e}")]
    NotCritical { gradient_norm: f64 },

    #[error("germ has nonzero value {value:.3e} at 0")]
    NonzeroValueAtOrigin { value: f64 },

    #[error(
        "Hessian rank ambiguous: eigenvalue {eigenvalue:.6e} lies in the dead band \
         [{band_lo:.3e}, {band_hi:.3e}]"
    )]
    RankAmbiguity {
        eigenvalue: f64,
        band_lo: f64,
        band_hi: f64,
    },

    #[error("classification indeterminate: {0}")]
    Indeterminate(String),

    #[error("parameter block not preserved by the reduction: {0}")]
    FibrednessViolation(String),

    #[error("input is not in split coordinates: {0}")]
    NotSplitCoordinates(String),

    #[error("hypotheses of the homotopy construction are violated: {0}")]
    OutOfHypothesis(String),

    #[error("homotopy matrix singular at t={t:.3}, |det|={det:.3e}; shrink the sample box")]
    HomotopyMatrixSingular { t: f64, det: f64 },

    #[error("oracle evaluation failed: {0}")]
    OracleFailure(String),

    #[error("the manifolds do not intersect at the base point (gradient norm {0:.3e})")]
    NoIntersection(f64),

    #[error("intersection is not isolated: the generating data vanishes to truncation order")]
    NonIsolated,

    #[error("no tried cotangent frame renders the manifold graphical over the base")]
    NotGraphicalAfterRetry,

    #[error("sampled section is not closed: mixed-partial asymmetry {0:.3e}")]
    ClosednessViolation(f64),

    #[error("Newton stage diverged at integration step {step}")]
    StageDivergence { step: usize },

    #[error("point is a regular solution (condition {condition:.3e}); nothing to classify")]
    RegularSolution { condition: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True when the error reports a refusal to classify rather than a failure.
    pub fn is_indeterminate(&self) -> bool {
        matches!(self, Error::Indeterminate(_))
    }
}
