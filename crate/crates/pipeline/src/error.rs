use taxel_core::CoreError;

use crate::feature::FeatureKind;

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("no frame exceeds the activation threshold {threshold}")]
    NoContact { threshold: u16 },
    #[error("empty input")]
    Empty,
    #[error("invalid pipeline configuration: {0}")]
    Config(String),
    #[error("{kind} feature has {got} values, expected {expected}")]
    Length { kind: FeatureKind, expected: usize, got: usize },
    #[error("{kind} feature contains a non-finite value at {index}")]
    NonFinite { kind: FeatureKind, index: usize },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("csv export failed: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
