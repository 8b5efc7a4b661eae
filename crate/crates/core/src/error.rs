use thiserror::Error;

/// Errors shared across the laboratory modules.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("scale {scale} outside the resolvable window [{min}, {max}]")]
    UnresolvableScale { scale: f64, min: f64, max: f64 },

    #[error("frequency range truncation: {0}")]
    RangeTruncation(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("wrap guard violated: {0}")]
    WrapGuard(String),

    #[error("parameter range refusal: {0}")]
    OutOfWindow(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
