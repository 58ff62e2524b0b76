use std::fmt;

use thiserror::Error;

/// A named precondition of one of the sharp norm characterizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    /// `M⁻¹A` is B-normal.
    SmootherBNormal,
    /// `I − M⁻¹A` is nonsingular.
    ErrorOperatorNonsingular,
    /// `I − M̂⁻¹B` is nonsingular.
    SymmetrizedComplementNonsingular,
    /// `Π_A` is a B-orthogonal projection.
    ProjectionBOrthogonal,
    /// `Π_A ≠ 0` and `Π_A ≠ I`.
    ProperCoarseSpace,
    /// `‖I − M⁻¹A‖_B < 1`.
    SmoothingAssumption,
    /// The characterization is only stated for equal pre- and post-smoothing.
    SymmetricSmoothingSteps,
    /// The `E₊` characterization is only stated for one smoothing step.
    SingleSmoothingStep,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Hypothesis::SmootherBNormal => "M^-1 A is B-normal",
            Hypothesis::ErrorOperatorNonsingular => "I - M^-1 A is nonsingular",
            Hypothesis::SymmetrizedComplementNonsingular => "I - Mhat^-1 B is nonsingular",
            Hypothesis::ProjectionBOrthogonal => "coarse-grid correction is B-orthogonal",
            Hypothesis::ProperCoarseSpace => "coarse-grid correction is neither 0 nor I",
            Hypothesis::SmoothingAssumption => "||I - M^-1 A||_B < 1",
            Hypothesis::SymmetricSmoothingSteps => "nu1 == nu2",
            Hypothesis::SingleSmoothingStep => "nu1 == nu2 == 1",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (relative asymmetry {residual:e})")]
    NonHermitian { residual: f64 },
    #[error("matrix contains NaN or infinite entries")]
    NonFinite,
    #[error("eigenvalue iteration did not converge")]
    ConvergenceFailure,
    #[error("matrix is not Hermitian positive definite (eigenvalue {eigenvalue:e})")]
    NotHpd { eigenvalue: f64 },
    #[error("matrix is singular (pivot {pivot:e})")]
    Singular { pivot: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("matrix is not B-normal (commutator residual {residual:e})")]
    NotBNormal { residual: f64 },
    #[error("coarse-grid matrix is singular or ill-conditioned (condition {condition:e}){}", level_suffix(*.level))]
    SingularCoarseMatrix {
        condition: f64,
        level: Option<usize>,
    },
    #[error("transfer operator is rank deficient (singular value ratio {ratio:e})")]
    RankDeficientTransfer { ratio: f64 },
    #[error("coarse-grid correction is not B-orthogonal (residual {residual:e})")]
    NotBOrthogonal { residual: f64 },
    #[error("smoother is singular")]
    SingularSmoother,
    #[error("smoothing assumption violated: ||I - M^-1 A||_B = {norm}{}", level_suffix(*.level))]
    SmoothingAssumptionViolated { norm: f64, level: Option<usize> },
    #[error("error operator I - M^-1 A is singular")]
    SingularErrorOperator,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(Hypothesis),
    #[error("coarse spaces are not nested (largest principal angle {angle:e} rad)")]
    NestingViolated { angle: f64 },
    #[error("level constant alpha_{level} = {alpha} is outside [0, 1)")]
    AlphaOutOfRange { level: usize, alpha: f64 },
    #[error("invalid problem specification: {0}")]
    InvalidSpec(String),
    #[error("zero diagonal entry at row {index}")]
    ZeroDiagonal { index: usize },
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("at most {max} smoothing steps are supported, got {got}")]
    TooManySmoothingSteps { max: usize, got: usize },
    #[error("matrix market: {0}")]
    MatrixMarket(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn level_suffix(level: Option<usize>) -> String {
    match level {
        Some(k) => format!(" on level {k}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn dims(expected: impl fmt::Display, found: impl fmt::Display) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// Attach a hierarchy level to errors that carry one.
    pub fn at_level(self, k: usize) -> Self {
        match self {
            Error::SingularCoarseMatrix { condition, .. } => Error::SingularCoarseMatrix {
                condition,
                level: Some(k),
            },
            Error::SmoothingAssumptionViolated { norm, .. } => Error::SmoothingAssumptionViolated {
                norm,
                level: Some(k),
            },
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
