use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rotation axis has norm {norm}, expected 1")]
    NonUnitAxis { norm: f64 },
    #[error("dimension mismatch ({left} vs {right})")]
    DimMismatch { left: usize, right: usize },
    #[error("matrix is not unitary (defect {defect:e})")]
    NonUnitary { defect: f64 },
    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("{name} must be strictly positive, got {value}")]
    NonPositiveInput { name: &'static str, value: f64 },
    #[error("theta = {theta} does not equal pi/(2n) = {expected} for n = {n}")]
    ThetaMismatch { theta: f64, expected: f64, n: usize },
    #[error("gate {gate} cannot be built from n = {n} equal bangs (X needs odd n, Y even n)")]
    ParityMismatch { gate: String, n: usize },
    #[error("theta = {theta} is in the weak-driving regime (theta <= pi/4)")]
    WeakRegime { theta: f64 },
    #[error("theta = {theta} is in the strong-driving regime (theta > pi/4)")]
    StrongRegime { theta: f64 },
    #[error("no bang sequence reached the target (best infidelity {best_infidelity:e})")]
    NotFound { best_infidelity: f64 },
    #[error("sequence has zero total time")]
    EmptySequence,
    #[error("invalid bang sequence: {0}")]
    InvalidSequence(String),
    #[error("time {t} lies outside [0, {period}]")]
    OutOfDomain { t: f64, period: f64 },
    #[error("step refinement did not converge (Richardson defect {defect:e} after {steps} steps)")]
    NoConvergence { defect: f64, steps: usize },
    #[error("quadrature would need {nodes} nodes (budget {budget})")]
    QuadratureBudgetExceeded { nodes: usize, budget: usize },
    #[error("construction failed: {0}")]
    ConstructionFailed(String),
    #[error("{0}")]
    Precondition(String),
}

impl Error {
    /// Numerical failures as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::NotFound { .. }
                | Error::QuadratureBudgetExceeded { .. }
                | Error::ConstructionFailed(_)
        )
    }
}
