use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use taxel_core::{Dataset, Split};
use taxel_pipeline::{extract_all, FeatureKind, PipelineConfig};

use crate::data::LabeledFeatures;
use crate::error::{LearnError, Result};
use crate::eval::{evaluate, EvalReport};
use crate::model::train_mlp;
use crate::nn::DenseNetConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AblationConfig {
    pub pipeline: PipelineConfig,
    pub mlp: DenseNetConfig,
    /// Train the per-feature models concurrently.
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub kind: FeatureKind,
    pub label: String,
    pub train_samples: usize,
    pub test_samples: usize,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    pub fn accuracy(&self, kind: FeatureKind) -> Option<f64> {
        self.rows.iter().find(|r| r.kind == kind).map(|r| r.report.accuracy)
    }

    pub fn render(&self) -> String {
        let mut s = format!("{:<6} {:<20} {:>6} {:>6} {:>9}\n", "label", "feature", "train", "test", "accuracy");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<6} {:<20} {:>6} {:>6} {:>9.4}",
                r.label,
                r.kind.name(),
                r.train_samples,
                r.test_samples,
                r.report.accuracy
            );
        }
        s
    }
}

fn labeled(dataset: &Dataset, split: Split, kind: FeatureKind, cfg: &PipelineConfig) -> Result<LabeledFeatures> {
    let set = extract_all(kind, dataset.subset(split), cfg)?;
    LabeledFeatures::try_from(&set)
}

fn run_one(dataset: &Dataset, kind: FeatureKind, config: &AblationConfig) -> Result<AblationRow> {
    let train = labeled(dataset, Split::Train, kind, &config.pipeline)?;
    let test = labeled(dataset, Split::Test, kind, &config.pipeline)?;
    let model = train_mlp(&train, &config.mlp)?;
    let report = evaluate(&model, &test)?;
    Ok(AblationRow {
        kind,
        label: kind.short_label().to_string(),
        train_samples: train.len(),
        test_samples: test.len(),
        report,
    })
}

/// Trains one MLP per feature kind under an identical protocol and
/// evaluates each on the held-out participants.
pub fn ablation_run(dataset: &Dataset, kinds: &[FeatureKind], config: &AblationConfig) -> Result<AblationTable> {
    if !dataset.is_split() {
        return Err(LearnError::Config("dataset has no train/test participant split".into()));
    }
    let tagged = |kind: FeatureKind| {
        run_one(dataset, kind, config).map_err(|e| LearnError::Feature { kind, source: Box::new(e) })
    };
    let rows = if config.parallel {
        kinds.par_iter().map(|&k| tagged(k)).collect::<Result<Vec<_>>>()?
    } else {
        kinds.iter().map(|&k| tagged(k)).collect::<Result<Vec<_>>>()?
    };
    Ok(AblationTable { rows })
}
