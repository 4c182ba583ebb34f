use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum MorlError {
    /// Inputs whose dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// Values outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),
    /// Exhaustive enumeration would exceed the configured cap.
    #[error("enumeration needs {required} deterministic policies, cap is {cap}")]
    Capacity { required: u128, cap: u64 },
    /// Invalid algorithm configuration.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl MorlError {
    /// Short machine-readable name of the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            MorlError::Shape(_) => "shape",
            MorlError::Domain(_) => "domain",
            MorlError::Capacity { .. } => "capacity",
            MorlError::Config(_) => "config",
            MorlError::Json(_) => "json",
            MorlError::Io(_) => "io",
            MorlError::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, MorlError>;

pub(crate) fn shape(msg: impl Into<String>) -> MorlError {
    MorlError::Shape(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> MorlError {
    MorlError::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> MorlError {
    MorlError::Config(msg.into())
}
