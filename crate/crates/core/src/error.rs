use thiserror::Error;

pub type Result<T> = std::result::Result<T, MetricError>;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("matrix numerically singular (inverse condition {ratio:.3e})")]
    Singular { ratio: f64 },

    #[error("S is not self-adjoint: relative residual {residual:.3e}")]
    NotSelfAdjoint { residual: f64 },

    #[error("H is not pseudo-Hermitian with respect to S: relative residual ‖SH − H†S‖ = {residual:.3e}")]
    NotPseudoHermitian { residual: f64 },

    #[error("H is defective within tolerance (eigenvector inverse condition {ratio:.3e}); exceptional point?")]
    Defective { ratio: f64 },

    #[error("ambiguous conjugate pairing for eigenvalue {re:.6} {im:+.6}i ({candidates} candidates)")]
    AmbiguousPairing { re: f64, im: f64, candidates: usize },

    #[error("eigenvalue {re:.6} {im:+.6}i has no conjugate partner")]
    UnpairedEigenvalue { re: f64, im: f64 },

    #[error("eigenvector residual {residual:.3e} exceeds tolerance")]
    InaccurateEigenpair { residual: f64 },

    #[error("exceptional point in sector n = {n}: radicand {radicand:.3e}")]
    ExceptionalPoint { n: usize, radicand: f64 },

    #[error("broken regime: radicand {radicand:.3e} ≤ 0 at boson occupation {n}")]
    BrokenRegime { n: usize, radicand: f64 },

    #[error("generator condition ({condition}) violated: {detail}")]
    ConditionViolated { condition: &'static str, detail: String },

    #[error("no generator supplied for eigenvalue {re:.6} {im:+.6}i ({needed} needed, {found} found)")]
    MissingGenerator { re: f64, im: f64, needed: usize, found: usize },

    #[error("S is semidefinite: no indefiniteness witness exists")]
    Semidefinite,

    #[error("state has no component in the physical subspace")]
    OutsidePhysicalSpace,

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl MetricError {
    /// Parameter-regime failures: the construction is not defined here, as
    /// opposed to a check that ran and failed.
    pub fn is_regime(&self) -> bool {
        matches!(
            self,
            MetricError::ExceptionalPoint { .. }
                | MetricError::BrokenRegime { .. }
                | MetricError::Defective { .. }
                | MetricError::InvalidParameter(_)
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self, MetricError::Io(_) | MetricError::Json(_))
    }
}
