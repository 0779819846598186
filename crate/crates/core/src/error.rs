use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error at r = {r}: {what}")]
    Domain { what: String, r: f64 },
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("construction error: {0}")]
    Construction(String),
    #[error("smoothing error: {0}")]
    Smoothing(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
