use thiserror::Error;

/// Failure modes shared by every module of the engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QhError {
    #[error("degree undefined for the zero polynomial")]
    DegreeUndefined,
    #[error("not homogeneous: degrees {0} and {1} mixed")]
    NotHomogeneous(i64, i64),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("invalid type: {0}")]
    InvalidType(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("assumption failed: {0}")]
    Assumption(String),
    #[error("kernel hypothesis fails at degree {degree}: restricted operator has a {dim}-dimensional kernel")]
    KernelHypothesis { degree: i64, dim: usize },
    #[error("target not in range (residual {residual})")]
    NotInRange { residual: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("unknown coefficient name {0:?}")]
    UnknownCoefficient(String),
}

impl QhError {
    pub fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        QhError::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, QhError>;
