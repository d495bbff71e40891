use thiserror::Error;

/// Errors raised by the algebra, canonicalization, and group routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operands belong to different algebra configurations")]
    ConfigMismatch,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid algebra configuration: {0}")]
    InvalidConfig(String),
    #[error("body is not invertible{}", location(.at))]
    BodyNotInvertible { at: Option<String> },
    #[error("parity mismatch: {0}")]
    ParityMismatch(String),
    #[error("convergence condition violated: {0}")]
    ConvergenceViolation(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix has nonzero body")]
    NonZeroBody,
    #[error("matrix is not unipotent (body differs from identity)")]
    NotUnipotent,
    #[error("basis is degenerate: {0}")]
    BasisDegenerate(String),
    #[error("ad operator has nonzero body")]
    NonZeroBodyOperator,
    #[error("metric is not even: {0}")]
    NotEven(String),
    #[error("metric is not graded symmetric: {0}")]
    NotGradedSymmetric(String),
    #[error("degenerate body: {0}")]
    DegenerateBody(String),
    #[error("odd dimension must be even, got n = {0}")]
    OddDimensionOdd(usize),
    #[error("gamma form is not body reduced: {0}")]
    NotBodyReduced(String),
    #[error("norm bound violated: ||X|| + ||Y|| = {0} exceeds ln 2")]
    NormBoundViolation(f64),
    #[error("matrix is not in the isometry Lie algebra: {0}")]
    NotInLieAlgebra(String),
    #[error("matrix is not in g0: {0}")]
    NotInG0(String),
    #[error("operation has no exact rational result: {0}")]
    Inexact(String),
    #[error("parse error: {0}")]
    Parse(String),
}

fn location(at: &Option<String>) -> String {
    match at {
        Some(s) => format!(" at {s}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn body_not_invertible() -> Self {
        Error::BodyNotInvertible { at: None }
    }

    /// True for errors caused by malformed or invariant-violating input,
    /// false for numerical gate failures.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::BodyNotInvertible { .. }
                | Error::ConvergenceViolation(_)
                | Error::NonZeroBodyOperator
                | Error::NormBoundViolation(_)
                | Error::Inexact(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
