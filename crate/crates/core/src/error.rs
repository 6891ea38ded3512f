use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("point {0:?} lies outside the reference tetrahedron")]
    OutsideReference([f64; 3]),

    #[error("unsupported quadrature degree {0} (supported: 1..=10)")]
    UnsupportedDegree(usize),

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },

    #[error("division by constant zero at position {0}")]
    DivisionByZero(usize),

    #[error("expression evaluation failed at {point:?}: {msg}")]
    Evaluation { point: [f64; 3], msg: String },

    #[error("unsupported expression: {0}")]
    UnsupportedExpression(String),

    #[error("field is not zero on the boundary: |w| = {value:.3e} at {point:?}")]
    BoundaryIncompatible { point: [f64; 3], value: f64 },

    #[error("linear solver failed: {msg} (residual history: {residuals:?})")]
    Solver { msg: String, residuals: Vec<f64> },

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("time {0} outside the trajectory interval")]
    TimeOutOfRange(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
