use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid fan: {0}")]
    InvalidFan(String),
    #[error("invalid cone: {0}")]
    InvalidCone(String),
    #[error("invalid Bott tower spec: {0}")]
    InvalidSpec(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{0} is not a face of any maximal cone")]
    NotAFace(String),
    #[error("divisor is not ample: {0}")]
    NotAmple(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
