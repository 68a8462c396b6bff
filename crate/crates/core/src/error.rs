use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the structural and numerical layers.
///
/// Vertex indices carried by errors are 1-based, matching all external I/O.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },

    #[error("empty matrix")]
    EmptyMatrix,

    #[error("malformed rational literal {0:?}")]
    MalformedLiteral(String),

    #[error("zero denominator in literal {0:?}")]
    ZeroDenominator(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("diagonal entry a_{0}{0} is positive; the matrix cannot be dissipative")]
    PositiveDiagonal(usize),

    #[error("vertex {0} is not a white endpoint")]
    NotAnEndpoint(usize),

    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),

    #[error("graph is not stably dissipative (a cycle has no strong link)")]
    NotStablyDissipative,

    #[error("equilibrium must be strictly positive; coordinate {0} is not")]
    NonPositiveEquilibrium(usize),

    #[error("the linear system A q = -r has no solution")]
    NoSolution,

    #[error("no strictly positive solution of A q = -r was found")]
    NoPositiveSolution,

    #[error("point must be strictly positive; coordinate {0} is not")]
    NonPositivePoint(usize),

    #[error("initial state must be strictly positive; coordinate {0} is not")]
    NonPositiveStart(usize),

    #[error("step size must be positive and finite")]
    InvalidStep,

    #[error("positivity could not be kept at t = {t} after {halvings} step halvings")]
    StepUnderflow { t: f64, halvings: u32 },

    #[error("singular Jacobian in leaf/equilibria Newton solve at iteration {0}")]
    SingularJacobian(usize),

    #[error("Newton solve did not converge (residual {residual:e} after {iterations} iterations)")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),

    #[error("certificate must have {expected} strictly positive entries")]
    InvalidCertificate { expected: usize },
}
