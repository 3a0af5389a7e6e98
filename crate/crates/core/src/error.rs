use thiserror::Error;

pub type Result<T> = std::result::Result<T, SuslovError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SuslovError {
    #[error("invalid inertia: {0}")]
    InvalidInertia(String),
    #[error("step size must be finite and positive, got {0}")]
    InvalidStep(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("step denominator {denominator:e} is within tolerance of zero (pole of the map)")]
    DegenerateStep { denominator: f64 },
    #[error("inertia has I13 = I23 = 0; the planar change of coordinates is not invertible")]
    DegenerateInertia,
    #[error("level h = {h} is outside the admissible range (0, {upper})")]
    LevelOutOfRange { h: f64, upper: f64 },
    #[error("state lies on the steady-state line I13*w1 + I23*w2 = 0")]
    FixedPointState,
    #[error("step matrix is singular or ill-conditioned (condition estimate {condition:e})")]
    SingularStepMatrix { condition: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("integration needs {needed} steps, budget is {budget}")]
    StepBudgetExceeded { needed: u64, budget: u64 },
    #[error("cannot fit convergence order: {0}")]
    DegenerateFit(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
