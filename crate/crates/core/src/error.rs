use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OscatError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("size limit exceeded: {what} would be {requested}, cap is {cap}")]
    SizeLimit {
        what: &'static str,
        requested: usize,
        cap: usize,
    },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("infeasible problem")]
    Infeasible,
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
}

pub type Result<T> = std::result::Result<T, OscatError>;
