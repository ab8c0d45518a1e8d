use std::path::PathBuf;

use crate::gesture::GestureClass;
use crate::layout::Section;

pub type Result<T, E = CoreError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error("taxel ({row}, {col}) is outside the {section} section ({rows}x{cols})")]
    OutOfBounds {
        section: Section,
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("invalid recording: {0}")]
    InvalidRecording(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot stratify: class {class} has {count} sample(s), need at least 2")]
    Stratification { class: GestureClass, count: usize },
    #[error("unlabeled recording at index {0}")]
    Unlabeled(usize),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}
