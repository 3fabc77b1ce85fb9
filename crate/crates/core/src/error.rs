use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: line {line}, column {column}: cannot parse {value:?} as a number")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        value: String,
    },

    #[error("invalid data: {0}")]
    Validation(String),

    #[error("feature value {value} at row {row}, column {column} is negative; chi-squared scoring requires non-negative features")]
    Domain { row: usize, column: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("cannot stratify: class {class:?} has {count} samples but {k} folds were requested")]
    Stratification { class: String, count: usize, k: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("training failed: {0}")]
    Training(String),

    #[error("cannot load model: {0}")]
    ModelLoad(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
