//! Neural classifiers (MLP, 1D CNN, LSTM) and their shared training loop.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use taxel_core::{seed, train_val_split, GestureClass};

use crate::adam::AdamConfig;
use crate::data::LabeledFeatures;
use crate::error::{LearnError, Result};
use crate::layers::{Conv1d, Dense, Layer, Lstm, MaxPool1d};
use crate::loss::{argmax, softmax_cross_entropy};
use crate::network::{Grads, Optimizer, Sequential};

/// Optimization settings shared by the neural models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Stop after this many epochs without a validation-accuracy improvement.
    pub patience: usize,
    /// Share of the training data used for fitting; the rest validates.
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 0.00025, batch_size: 32, max_epochs: 300, patience: 20, train_fraction: 0.8, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(LearnError::Config(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return Err(LearnError::Config("batch_size and max_epochs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DenseNetConfig {
    pub hidden_dims: Vec<usize>,
    pub output_dim: usize,
    #[serde(flatten)]
    pub train: TrainConfig,
}

impl Default for DenseNetConfig {
    fn default() -> Self {
        Self { hidden_dims: vec![256, 128, 64], output_dim: GestureClass::COUNT, train: TrainConfig::default() }
    }
}

impl DenseNetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.output_dim != GestureClass::COUNT {
            return Err(LearnError::Config(format!("output_dim must be {}, got {}", GestureClass::COUNT, self.output_dim)));
        }
        if self.hidden_dims.len() != 3 || self.hidden_dims.contains(&0) {
            return Err(LearnError::Config(format!("expected three non-empty hidden layers, got {:?}", self.hidden_dims)));
        }
        self.train.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LstmConfig {
    pub hidden: usize,
    #[serde(flatten)]
    pub train: TrainConfig,
}

impl Default for LstmConfig {
    fn default() -> Self {
        Self { hidden: 64, train: TrainConfig { learning_rate: 0.0001, ..TrainConfig::default() } }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CnnConfig {
    pub kernel: usize,
    pub channels: [usize; 2],
    pub dense: usize,
    #[serde(flatten)]
    pub train: TrainConfig,
}

impl Default for CnnConfig {
    fn default() -> Self {
        Self { kernel: 5, channels: [16, 32], dense: 64, train: TrainConfig { learning_rate: 0.001, ..TrainConfig::default() } }
    }
}

/// Affine input normalization fitted on the training rows. A single entry
/// applies to every position (used for sequence models).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputScaler {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl InputScaler {
    pub fn per_feature(rows: &[Vec<f64>]) -> Self {
        let width = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; width];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; width];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var.into_iter().map(|s| scale_from_var(s / n)).collect();
        Self { mean, scale }
    }

    pub fn global(rows: &[Vec<f64>]) -> Self {
        let all: Vec<f64> = rows.iter().flatten().copied().collect();
        let n = all.len().max(1) as f64;
        let mean = all.iter().sum::<f64>() / n;
        let var = all.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Self { mean: vec![mean], scale: vec![scale_from_var(var)] }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        if self.mean.len() == 1 {
            x.iter().map(|v| (v - self.mean[0]) * self.scale[0]).collect()
        } else {
            x.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (v - m) * s).collect()
        }
    }
}

/// Inverse standard deviation; constant inputs are only centered.
fn scale_from_var(var: f64) -> f64 {
    if var > 1e-12 {
        1.0 / var.sqrt()
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
}

pub fn mlp_network(input_dim: usize, config: &DenseNetConfig, seed: u64) -> Sequential {
    let mut rng = seed::rng(seed);
    let mut layers = Vec::new();
    let mut width = input_dim;
    for &h in &config.hidden_dims {
        layers.push(Layer::Dense(Dense::new(width, h, &mut rng)));
        layers.push(Layer::Relu);
        width = h;
    }
    layers.push(Layer::Dense(Dense::new(width, config.output_dim, &mut rng)));
    Sequential::new(layers)
}

pub fn cnn_network(input_len: usize, config: &CnnConfig, seed: u64) -> Result<Sequential> {
    let k = config.kernel;
    let after_first = input_len.checked_sub(k - 1).map(|l| l / 2).unwrap_or(0);
    let after_second = after_first.checked_sub(k - 1).map(|l| l / 2).unwrap_or(0);
    if k == 0 || after_second == 0 {
        return Err(LearnError::Config(format!("sequence of length {input_len} is too short for kernel {k}")));
    }
    let [c1, c2] = config.channels;
    let mut rng = seed::rng(seed);
    Ok(Sequential::new(vec![
        Layer::Conv1d(Conv1d::new(1, c1, k, &mut rng)),
        Layer::Relu,
        Layer::MaxPool1d(MaxPool1d { channels: c1, size: 2 }),
        Layer::Conv1d(Conv1d::new(c1, c2, k, &mut rng)),
        Layer::Relu,
        Layer::MaxPool1d(MaxPool1d { channels: c2, size: 2 }),
        Layer::Dense(Dense::new(c2 * after_second, config.dense, &mut rng)),
        Layer::Relu,
        Layer::Dense(Dense::new(config.dense, GestureClass::COUNT, &mut rng)),
    ]))
}

pub fn lstm_network(config: &LstmConfig, seed: u64) -> Sequential {
    let mut rng = seed::rng(seed);
    Sequential::new(vec![
        Layer::Lstm(Lstm::new(1, config.hidden, &mut rng)),
        Layer::Dense(Dense::new(config.hidden, GestureClass::COUNT, &mut rng)),
    ])
}

fn mean_loss_and_accuracy(net: &Sequential, rows: &[Vec<f64>], labels: &[usize]) -> (f64, f64) {
    if rows.is_empty() {
        return (0.0, 0.0);
    }
    let (mut loss, mut correct) = (0.0, 0usize);
    for (x, &y) in rows.iter().zip(labels) {
        let logits = net.infer(x);
        loss += softmax_cross_entropy(&logits, y).0;
        correct += usize::from(argmax(&logits) == y);
    }
    (loss / rows.len() as f64, correct as f64 / rows.len() as f64)
}

/// Mini-batch Adam on softmax cross-entropy with a stratified validation
/// hold-out. Returns the parameters from the epoch with the best
/// validation accuracy, breaking ties by validation loss. Patience counts
/// epochs since the last strict accuracy improvement.
pub fn fit(
    mut net: Sequential,
    data: &LabeledFeatures,
    scaler_of: fn(&[Vec<f64>]) -> InputScaler,
    config: &TrainConfig,
) -> Result<(Sequential, InputScaler, History)> {
    config.validate()?;
    if data.is_empty() {
        return Err(LearnError::Config("no training samples".into()));
    }
    let (train_idx, val_idx) = train_val_split(&data.labels, config.train_fraction, config.seed)?;
    let train = data.select(&train_idx);
    let val = data.select(&val_idx);
    let scaler = scaler_of(&train.rows);
    let train_x: Vec<Vec<f64>> = train.rows.iter().map(|r| scaler.apply(r)).collect();
    let val_x: Vec<Vec<f64>> = val.rows.iter().map(|r| scaler.apply(r)).collect();
    let train_y = train.class_codes();
    let val_y = val.class_codes();

    let mut optimizer = Optimizer::new(&net, AdamConfig::new(config.learning_rate));
    let mut grads = Grads::zeros_like(&net);
    let mut rng = seed::rng(seed::derive(config.seed, &[0x5348_5546]));
    let mut order: Vec<usize> = (0..train_x.len()).collect();
    let mut history = History::default();
    let mut best: Option<(f64, f64, Sequential)> = None;
    let mut since_best = 0;

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let (mut epoch_loss, mut correct) = (0.0, 0usize);
        for batch in order.chunks(config.batch_size) {
            grads.zero();
            for &i in batch {
                let (logits, caches) = net.forward(&train_x[i]);
                let (loss, gy) = softmax_cross_entropy(&logits, train_y[i]);
                if !loss.is_finite() {
                    return Err(LearnError::Divergence { epoch, loss });
                }
                epoch_loss += loss;
                correct += usize::from(argmax(&logits) == train_y[i]);
                net.backward(&caches, &gy, &mut grads);
            }
            grads.scale(1.0 / batch.len() as f64);
            optimizer.step(&mut net, &grads)?;
        }
        let (val_loss, val_accuracy) = mean_loss_and_accuracy(&net, &val_x, &val_y);
        if !val_loss.is_finite() {
            return Err(LearnError::Divergence { epoch, loss: val_loss });
        }
        history.epochs.push(EpochRecord {
            epoch,
            train_loss: epoch_loss / train_x.len() as f64,
            train_accuracy: correct as f64 / train_x.len() as f64,
            val_loss,
            val_accuracy,
        });
        let improved = best.as_ref().is_none_or(|b| val_accuracy > b.0);
        let tied_lower_loss = best.as_ref().is_some_and(|b| val_accuracy == b.0 && val_loss < b.1);
        if improved || tied_lower_loss {
            best = Some((val_accuracy, val_loss, net.clone()));
            history.best_epoch = epoch;
            history.best_val_accuracy = val_accuracy;
        }
        if improved {
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                break;
            }
        }
        log::debug!(
            "epoch {epoch}: train loss {:.4} val loss {val_loss:.4} val acc {val_accuracy:.4}",
            epoch_loss / train_x.len() as f64
        );
    }
    let net = best.map(|b| b.2).unwrap_or(net);
    Ok((net, scaler, history))
}
