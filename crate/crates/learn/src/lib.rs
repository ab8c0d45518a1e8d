//! Gesture classifiers written from scratch: dense, convolutional and
//! recurrent networks trained with Adam, and a CART random forest.

pub mod ablation;
pub mod adam;
pub mod data;
pub mod error;
pub mod eval;
pub mod forest;
pub mod gradcheck;
pub mod layers;
pub mod loss;
pub mod model;
pub mod network;
pub mod nn;

pub use ablation::{ablation_run, AblationConfig, AblationRow, AblationTable};
pub use adam::{adam_step, AdamConfig, AdamState};
pub use data::LabeledFeatures;
pub use error::{LearnError, Result};
pub use eval::{evaluate, EvalReport};
pub use forest::{DecisionTree, ForestConfig, MaxFeatures, RandomForest};
pub use gradcheck::{gradient_check, GradCheckReport, Head};
pub use model::{train_cnn1d, train_lstm, train_mlp, train_rf, ModelConfigs, ModelKind, ModelParams, TrainedModel};
pub use network::{Grads, Optimizer, Sequential};
pub use nn::{CnnConfig, DenseNetConfig, History, InputScaler, LstmConfig, TrainConfig};
