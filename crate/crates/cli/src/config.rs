use std::path::Path;

use serde::{Deserialize, Serialize};
use taxel_learn::{ModelConfigs, ModelKind};
use taxel_pipeline::PipelineConfig;
use taxel_sensorsim::{IndentationProtocol, SynthConfig};
use taxel_stream::SegmenterConfig;

use crate::args::{PipelineArgs, TrainOverrides};
use crate::error::{CliError, Result};

/// Contents of a `--config` file. Every section is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    /// Absent means "inherit": eval and listen then use the pipeline
    /// recorded when the model was trained.
    pub pipeline: Option<PipelineConfig>,
    pub models: ModelConfigs,
    pub synth: SynthConfig,
    pub characterize: IndentationProtocol,
    pub segmenter: SegmenterConfig,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CliError::Missing { path: path.to_path_buf() },
            _ => CliError::io(path, e),
        })?;
        serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_path_buf(), source })
    }

    /// A flag seed wins; otherwise the file must provide one.
    pub fn seed(&self, flag: Option<u64>) -> Result<u64> {
        flag.or(self.seed).ok_or_else(|| CliError::Config("a seed is required".into()))
    }
}

pub fn apply_pipeline(mut cfg: PipelineConfig, args: &PipelineArgs) -> Result<PipelineConfig> {
    if let Some(v) = args.threshold {
        cfg.activation_threshold = v;
    }
    if let Some(v) = args.frames {
        cfg.target_frames = v;
    }
    if let Some(v) = args.window {
        cfg.smoothing_window = v;
    }
    if let Some(v) = args.sample_rate {
        cfg.sample_rate_hz = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Applies training flags to the configuration of `kind` only, then seeds
/// every family.
pub fn apply_training(mut models: ModelConfigs, kind: ModelKind, args: &TrainOverrides, seed: u64, parallel: bool) -> ModelConfigs {
    let train = match kind {
        ModelKind::Mlp => Some(&mut models.mlp.train),
        ModelKind::Lstm => Some(&mut models.lstm.train),
        ModelKind::Cnn1d => Some(&mut models.cnn1d.train),
        ModelKind::Rf => None,
    };
    if let Some(t) = train {
        if let Some(v) = args.lr {
            t.learning_rate = v;
        }
        if let Some(v) = args.epochs {
            t.max_epochs = v;
        }
        if let Some(v) = args.batch_size {
            t.batch_size = v;
        }
        if let Some(v) = args.patience {
            t.patience = v;
        }
    }
    if let Some(v) = args.trees {
        models.rf.n_trees = v;
    }
    if parallel {
        models.rf.parallel = true;
    }
    models.with_seed(seed)
}
