use thiserror::Error;

/// Errors raised by model construction, set computations, solvers and the
/// simulation harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("output {output} is decoupled from every input (no relative degree)")]
    NoRelativeDegree { output: usize },
    #[error("G*B is singular or ill-conditioned (condition number {condition:e})")]
    SingularGB { condition: f64 },
    #[error("beta has spectral radius {spectral_radius} (must be < 1)")]
    UnstableBeta { spectral_radius: f64 },
    #[error("terminal law is not stabilizing: spectral radius of A+BK is {spectral_radius}")]
    UnstableTerminalLaw { spectral_radius: f64 },
    #[error("alpha for output {output}: expected {expected} coefficients, found {found}")]
    AlphaMismatch {
        output: usize,
        expected: usize,
        found: usize,
    },
    #[error("alpha for output {output}: leading coefficient must be nonzero")]
    AlphaLeadingZero { output: usize },
    #[error("reference trajectory too short: need index {needed}, have {available} samples")]
    TrajectoryTooShort { needed: usize, available: usize },
    #[error("input set is not an axis-aligned box")]
    NonBoxInputSet,
    #[error("empty box: lower >= upper in coordinate {index}")]
    EmptyBox { index: usize },
    #[error("maximal invariant set not finitely determined within {iterations} iterations")]
    NotFinitelyDetermined { iterations: usize },
    #[error("projection exceeded {cap} rows (reached {rows})")]
    ProjectionBlowup { rows: usize, cap: usize },
    #[error("ill-conditioned problem: {0}")]
    IllConditioned(String),
    #[error("innovation covariance is singular")]
    SingularInnovation,
    #[error("no admissible setpoint exists (terminal set empty or steady-state LP infeasible)")]
    InfeasibleTarget,
    #[error("plant left its validity envelope: {0}")]
    OutOfEnvelope(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
