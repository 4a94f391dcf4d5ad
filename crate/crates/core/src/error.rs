use thiserror::Error;

pub type Result<T> = std::result::Result<T, EngelError>;

/// Every failure the library can report. Each variant carries a stable
/// machine-readable code, see [`EngelError::code`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngelError {
    #[error("structure constants are not antisymmetric: c[{i}][{j}][{k}] != -c[{j}][{i}][{k}]")]
    NotAntisymmetric { i: usize, j: usize, k: usize },

    #[error("bracket table violates the Jacobi identity (residual {residual:e})")]
    NotLieAlgebra { residual: f64 },

    #[error("invalid distribution data: {0}")]
    InvalidDistribution(String),

    #[error("growth vector {growth:?} is not (2, 3, 4)")]
    NotEngel { growth: [usize; 3] },

    #[error("Levi-form kernel leaves the distribution (transverse part {transverse:e})")]
    KernelNotInD { transverse: f64 },

    #[error("no frame sign choice matches the requested orientations")]
    OrientationConflict,

    #[error("invariants violate the Jacobi restrictions, residuals {residuals:?}")]
    JacobiViolated { residuals: [f64; 6] },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invariants {t:?} belong to no family")]
    Unclassifiable { t: [f64; 6] },

    #[error("invariants are not of type III")]
    NotTypeIII,

    #[error("adaptive step size underflow at t = {t} (step {step:e})")]
    StepRejected { t: f64, step: f64 },

    #[error("t = {t} lies outside the profile domain [{start}, {end}]")]
    OutOfDomain { t: f64, start: f64, end: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl EngelError {
    pub fn code(&self) -> &'static str {
        match self {
            EngelError::NotAntisymmetric { .. } => "NotAntisymmetric",
            EngelError::NotLieAlgebra { .. } => "NotLieAlgebra",
            EngelError::InvalidDistribution(_) => "InvalidDistribution",
            EngelError::NotEngel { .. } => "NotEngel",
            EngelError::KernelNotInD { .. } => "KernelNotInD",
            EngelError::OrientationConflict => "OrientationConflict",
            EngelError::JacobiViolated { .. } => "JacobiViolated",
            EngelError::InvalidParams(_) => "InvalidParams",
            EngelError::Unclassifiable { .. } => "Unclassifiable",
            EngelError::NotTypeIII => "NotTypeIII",
            EngelError::StepRejected { .. } => "StepRejected",
            EngelError::OutOfDomain { .. } => "OutOfDomain",
            EngelError::InvalidInput(_) => "InvalidInput",
        }
    }
}
