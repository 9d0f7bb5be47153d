use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("lattice vector {0} is not integral")]
    NonIntegral(String),
    #[error("state is not homogeneous: {0}")]
    NotHomogeneous(String),
    #[error("mode index {index} is outside the allowed coset {coset}")]
    IndexOutsideCoset { index: String, coset: String },
    #[error("exponent {0} does not belong to the space `{1}`")]
    NotInSpace(String, String),
    #[error("truncation: {0}")]
    Truncation(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
