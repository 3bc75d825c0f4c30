use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Domain(String),
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("{0} is not squarefree")]
    NotSquarefree(u64),
    #[error("cannot add multiples of pi^{0} and pi^{1}")]
    PiExponentMismatch(i32, i32),
    #[error("discriminants differ: {0} vs {1}")]
    DiscriminantMismatch(i64, i64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
