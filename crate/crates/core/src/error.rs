use thiserror::Error;

/// Errors raised by the computational modules.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeckeError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole at v = {0}")]
    Pole(String),
    #[error("not q-rational: {0}")]
    NotQRational(String),
    #[error("capability error: {0}")]
    Capability(String),
    #[error("regularity violation: {0}")]
    Regularity(String),
    #[error("non-generic tableau: {0}")]
    NonGeneric(String),
    #[error("minimal object: {0}")]
    MinimalObject(String),
    #[error("use extraspecial STM: {0}")]
    UseExtraspecial(String),
    #[error("not residual: {0}")]
    NotResidual(String),
    #[error("cancellation failure: {0:?}")]
    Cancellation(Vec<String>),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, HeckeError>;
