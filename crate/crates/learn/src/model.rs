use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use taxel_pipeline::{FeatureKind, FeatureVector};

use crate::data::LabeledFeatures;
use crate::error::{LearnError, Result};
use crate::forest::{ForestConfig, RandomForest};
use crate::loss::{argmax, softmax};
use crate::network::Sequential;
use crate::nn::{self, CnnConfig, DenseNetConfig, History, InputScaler, LstmConfig};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mlp,
    Lstm,
    Rf,
    Cnn1d,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Mlp, ModelKind::Lstm, ModelKind::Rf, ModelKind::Cnn1d];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Mlp => "mlp",
            ModelKind::Lstm => "lstm",
            ModelKind::Rf => "rf",
            ModelKind::Cnn1d => "cnn1d",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = LearnError;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| LearnError::Config(format!("unknown model '{s}' (expected mlp, lstm, rf or cnn1d)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ModelParams {
    Network { scaler: InputScaler, network: Sequential, history: History },
    Forest(RandomForest),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub kind: ModelKind,
    pub feature_kind: FeatureKind,
    pub input_len: usize,
    pub params: ModelParams,
}

impl TrainedModel {
    pub fn history(&self) -> Option<&History> {
        match &self.params {
            ModelParams::Network { history, .. } => Some(history),
            ModelParams::Forest(_) => None,
        }
    }

    /// Class probabilities for one raw feature row (no kind check).
    pub fn predict_proba(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.input_len {
            return Err(LearnError::Shape(format!("model expects {} values, got {}", self.input_len, values.len())));
        }
        Ok(match &self.params {
            ModelParams::Network { scaler, network, .. } => softmax(&network.infer(&scaler.apply(values))),
            ModelParams::Forest(f) => f.predict_proba(values),
        })
    }

    pub fn predict(&self, values: &[f64]) -> Result<usize> {
        Ok(match &self.params {
            ModelParams::Forest(f) => {
                self.predict_proba(values)?;
                f.predict(values)
            }
            _ => argmax(&self.predict_proba(values)?),
        })
    }

    pub fn check_kind(&self, kind: FeatureKind) -> Result<()> {
        if kind != self.feature_kind {
            return Err(LearnError::KindMismatch { expected: self.feature_kind, got: kind });
        }
        Ok(())
    }

    pub fn predict_vector(&self, v: &FeatureVector) -> Result<Vec<f64>> {
        self.check_kind(v.kind())?;
        self.predict_proba(v.values())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: TrainedModel = serde_json::from_str(s)?;
        model.check_version()?;
        Ok(model)
    }

    fn check_version(&self) -> Result<()> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(LearnError::Config(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                self.format_version
            )));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let model: TrainedModel = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        model.check_version()?;
        Ok(model)
    }
}

fn network_model(kind: ModelKind, data: &LabeledFeatures, fitted: (Sequential, InputScaler, History)) -> TrainedModel {
    let (network, scaler, history) = fitted;
    TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        kind,
        feature_kind: data.kind,
        input_len: data.width(),
        params: ModelParams::Network { scaler, network, history },
    }
}

fn require_samples(data: &LabeledFeatures) -> Result<()> {
    if data.is_empty() || data.width() == 0 {
        return Err(LearnError::Config("no training samples".into()));
    }
    Ok(())
}

pub fn train_mlp(data: &LabeledFeatures, config: &DenseNetConfig) -> Result<TrainedModel> {
    config.validate()?;
    require_samples(data)?;
    let net = nn::mlp_network(data.width(), config, config.train.seed);
    let fitted = nn::fit(net, data, InputScaler::per_feature, &config.train)?;
    Ok(network_model(ModelKind::Mlp, data, fitted))
}

pub fn train_lstm(data: &LabeledFeatures, config: &LstmConfig) -> Result<TrainedModel> {
    if config.hidden == 0 {
        return Err(LearnError::Config("LSTM hidden size must be positive".into()));
    }
    require_samples(data)?;
    let net = nn::lstm_network(config, config.train.seed);
    let fitted = nn::fit(net, data, InputScaler::global, &config.train)?;
    Ok(network_model(ModelKind::Lstm, data, fitted))
}

pub fn train_cnn1d(data: &LabeledFeatures, config: &CnnConfig) -> Result<TrainedModel> {
    require_samples(data)?;
    let net = nn::cnn_network(data.width(), config, config.train.seed).map_err(|e| LearnError::Unsupported {
        model: ModelKind::Cnn1d,
        feature: data.kind,
        reason: e.to_string(),
    })?;
    let fitted = nn::fit(net, data, InputScaler::global, &config.train)?;
    Ok(network_model(ModelKind::Cnn1d, data, fitted))
}

pub fn train_rf(data: &LabeledFeatures, config: &ForestConfig) -> Result<TrainedModel> {
    let forest = RandomForest::fit(data, config)?;
    Ok(TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        kind: ModelKind::Rf,
        feature_kind: data.kind,
        input_len: data.width(),
        params: ModelParams::Forest(forest),
    })
}

/// Hyperparameters for every model family, as read from a config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfigs {
    pub mlp: DenseNetConfig,
    pub lstm: LstmConfig,
    pub cnn1d: CnnConfig,
    pub rf: ForestConfig,
}

impl ModelConfigs {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.mlp.train.seed = seed;
        self.lstm.train.seed = seed;
        self.cnn1d.train.seed = seed;
        self.rf.seed = seed;
        self
    }

    pub fn train(&self, kind: ModelKind, data: &LabeledFeatures) -> Result<TrainedModel> {
        match kind {
            ModelKind::Mlp => train_mlp(data, &self.mlp),
            ModelKind::Lstm => train_lstm(data, &self.lstm),
            ModelKind::Cnn1d => train_cnn1d(data, &self.cnn1d),
            ModelKind::Rf => train_rf(data, &self.rf),
        }
    }
}
