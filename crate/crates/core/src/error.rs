use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not hyperbolic: {0}")]
    NotHyperbolic(String),
    #[error("point coordinate {0} is not finite")]
    NonFinite(f64),
    #[error("no bracket found within lattice search radius {0}")]
    SearchRadiusExhausted(f64),
    #[error("period {period} exceeds enumeration bound {bound}")]
    BoundExceeded { period: u32, bound: u32 },
    #[error("integer overflow while computing A^{0}")]
    Overflow(u32),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("series needs {needed} terms, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("base point is not fixed by the automorphism (drift {0:e})")]
    InvalidBase(f64),
    #[error("linear system is singular")]
    Singular,
    #[error("graph transform undefined: A + B*P1 is singular")]
    GraphTransformUndefined,
    #[error("jet source {found:?} does not match expected {expected:?}")]
    SourceMismatch { expected: Vec<f64>, found: Vec<f64> },
    #[error("grid degenerate: {0}")]
    GridDegenerate(String),
    #[error("grid ratio {ratio} exceeds bound {bound}")]
    GridRatioExceeded { ratio: f64, bound: f64 },
    #[error("grid perturbation {perturbation:e} exceeds {allowed:e}")]
    PerturbationExceeded { perturbation: f64, allowed: f64 },
    #[error("plaque intersection not found inside the plaque domain")]
    DomainExhausted,
    #[error("scale r^{0} is below floating-point resolution")]
    ResolutionExhausted(u32),
    #[error("not enough samples: need {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("exponent undefined: all increments vanish")]
    ExponentUndefined,
}

pub type Result<T> = std::result::Result<T, Error>;
