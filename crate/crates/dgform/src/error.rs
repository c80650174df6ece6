//! Error types shared across the library.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum DgformError {
    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("empty segmentation: no pixels within the color bounds")]
    EmptySegmentation,

    #[error("invalid action: {0}")]
    Action(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("training diverged at update {update}: non-finite {component}")]
    Diverged { update: usize, component: String },

    #[error("checkpoint version mismatch: file has {found}, this build supports {expected}")]
    Version { found: u32, expected: u32 },

    #[error(transparent)]
    Tensor(#[from] dgform_core::TensorError),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, DgformError>;

impl DgformError {
    /// Process exit code: 1 for usage/config problems, 2 for runtime or
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            DgformError::Config(_)
            | DgformError::Parse { .. }
            | DgformError::Version { .. } => 1,
            _ => 2,
        }
    }
}
