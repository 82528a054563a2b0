use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("covariance is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("ill-conditioned matrix (condition number {condition:e} exceeds {limit:e})")]
    IllConditioned { condition: f64, limit: f64 },

    #[error("problem size {size} exceeds capacity {limit}")]
    Capacity { size: usize, limit: usize },

    #[error(
        "sinkhorn did not converge: marginal residual {residual:e} after {iterations} iterations"
    )]
    SinkhornNonConvergence { residual: f64, iterations: usize },

    #[error("network simplex exceeded {0} pivots")]
    PivotLimit(usize),

    #[error("dual potentials infeasible at pair ({i}, {j}): violation {violation:e}")]
    InfeasibleDuals { i: usize, j: usize, violation: f64 },

    #[error("effective domain is empty")]
    EmptyDomain,

    #[error("function is not convex: second difference {value:e} at index {index}")]
    NotConvex { index: usize, value: f64 },

    #[error("insufficient decay at the grid boundary: boundary log-value is {margin:.3} below the interior maximum (need {required})")]
    InsufficientDecay { margin: f64, required: f64 },

    #[error("recentering failed to converge: {0}")]
    RecenterNonConvergence(String),

    #[error("measure is not centered: |barycenter| = {norm:e} exceeds {tol:e} (the inequality fails for non-centered pairs, e.g. N(1,1) against N(-1,1))")]
    NotCentered { norm: f64, tol: f64 },

    #[error("constraint f(x) + g(y) <= -x.y violated by {violation:e} at x = {x:?}, y = {y:?}")]
    Inadmissible {
        x: Vec<f64>,
        y: Vec<f64>,
        violation: f64,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("moment map solver failed: {0}")]
    MomentMap(String),

    #[error("convexity degeneracy: second derivative {value:e} at x = {x}")]
    ConvexityDegeneracy { x: f64, value: f64 },

    #[error("Monte Carlo budget insufficient: {0}")]
    SampleBudget(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported: {0}")]
    Unsupported(String),
}
