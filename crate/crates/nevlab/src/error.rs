use thiserror::Error;

pub type Result<T> = std::result::Result<T, NevError>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NevError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error at column {pos}: {msg}\n  {input}\n  {caret}")]
    Parse {
        pos: usize,
        msg: String,
        input: String,
        caret: String,
    },
    #[error("local expansion failed: {0}")]
    ExpansionFailure(String),
    #[error("boundary collision: {0}")]
    BoundaryCollision(String),
    #[error("precision failure: {0}")]
    PrecisionFailure(String),
    #[error("circle collision at r = {0}")]
    CircleCollision(f64),
    #[error("not a pair: {0}")]
    NotAPair(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("not a solution: {0}")]
    NotASolution(String),
    #[error("degree violation: {0}")]
    DegreeViolation(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("unknown check: {0}")]
    UnknownCheck(String),
}

impl NevError {
    /// Builds a parse error whose message points at column `pos` of `input`.
    pub fn parse(input: &str, pos: usize, msg: impl Into<String>) -> Self {
        let col = input[..pos.min(input.len())].chars().count();
        NevError::Parse {
            pos,
            msg: msg.into(),
            input: input.to_string(),
            caret: format!("{}^", " ".repeat(col)),
        }
    }

    /// True for errors caused by malformed user input rather than numerics.
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            NevError::Parse { .. }
                | NevError::InvalidParameter(_)
                | NevError::InvalidInput(_)
                | NevError::UnknownCheck(_)
                | NevError::NotASolution(_)
                | NevError::DegreeViolation(_)
        )
    }
}
