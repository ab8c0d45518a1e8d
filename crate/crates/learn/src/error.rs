use taxel_pipeline::{FeatureKind, PipelineError};

use crate::model::ModelKind;

pub type Result<T, E = LearnError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum LearnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Divergence { epoch: usize, loss: f64 },
    #[error("model expects {expected} features, got {got}")]
    KindMismatch { expected: FeatureKind, got: FeatureKind },
    #[error("{model} model cannot be trained on {feature} features: {reason}")]
    Unsupported { model: ModelKind, feature: FeatureKind, reason: String },
    #[error("feature '{kind}': {source}")]
    Feature {
        kind: FeatureKind,
        #[source]
        source: Box<LearnError>,
    },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Core(#[from] taxel_core::CoreError),
    #[error("model file: {0}")]
    Serde(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
