use thiserror::Error;

#[derive(Debug, Error)]
pub enum BuraError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate interpolant: {0}")]
    Degenerate(String),

    #[error("pole structure violated: {0}")]
    PoleStructure(String),

    #[error("coefficient sign violated: {0}")]
    CoefficientSign(String),

    #[error("evaluation hit a pole at t = {0}")]
    PoleHit(f64),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = BuraError> = std::result::Result<T, E>;
