use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("example {index}: label (class {class}, spurious {spurious}) outside schema {num_classes}x{num_spurious}")]
    LabelOutOfRange {
        index: usize,
        class: usize,
        spurious: usize,
        num_classes: usize,
        num_spurious: usize,
    },

    #[error("class {0} has no examples")]
    EmptyClass(usize),

    #[error("group {0} has no examples")]
    EmptyGroup(usize),

    #[error("no nonempty group to evaluate")]
    NoGroups,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("class-imbalance ratio {ratio} outside [1, {max}]")]
    InvalidRatio { ratio: f64, max: f64 },

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("eigensolver failure: {0}")]
    Solver(String),

    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Divergence { epoch: usize, loss: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
