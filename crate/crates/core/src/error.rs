use thiserror::Error;

/// Errors raised by the solvers and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("omega0 must be positive (got {value})")]
    NonPositiveOmega { value: f64 },
    #[error("{field} must be non-negative (got {value})")]
    NegativeCoefficient { field: &'static str, value: f64 },
    #[error("{field} is not finite")]
    NonFinite { field: &'static str },
    #[error("canonical flag set but delta = {delta} differs from 1/omega0^2 = {expected}")]
    NonCanonicalDelta { delta: f64, expected: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field has {got} values, grid expects {expected}")]
    GridMismatch { expected: usize, got: usize },
    #[error("omega0^2 - 2 mu = {value} is not positive; no oscillatory homogeneous regime")]
    ImaginaryFrequency { value: f64 },
    #[error("numerical blowup at step {step}")]
    NumericalBlowup { step: usize },
    #[error("numerical blowup at grid index {index}, time level {level}")]
    FieldBlowup { index: usize, level: usize },
    #[error("invalid chain state: {0}")]
    InvalidChain(String),
    #[error("invalid integration request: {0}")]
    InvalidStep(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("found {found} zero crossings, at least 3 are required")]
    InsufficientCrossings { found: usize },
    #[error("cross-correlation peak is not unique")]
    AmbiguousPeak,
    #[error("adjacency matrix is not symmetric at ({row}, {col})")]
    AsymmetricInput { row: usize, col: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("omega^2 - mu (n - 1) = {value} is not positive; synchronized regime is unstable")]
    UnstableRegime { value: f64 },
    #[error("wave is not an exact solution (residual {residual:e})")]
    NotExactSolution { residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
