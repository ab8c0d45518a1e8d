use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr_free::gaussian;
use taxel_core::GestureClass;
use taxel_learn::{
    evaluate, train_cnn1d, train_lstm, train_mlp, train_rf, CnnConfig, DenseNetConfig, ForestConfig, LabeledFeatures,
    LearnError, LstmConfig, TrainConfig, TrainedModel,
};
use taxel_pipeline::FeatureKind;

mod rand_distr_free {
    use rand::Rng;

    /// Box-Muller standard normal.
    pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
        let u: f64 = rng.random_range(f64::EPSILON..1.0);
        let v: f64 = rng.random();
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    }
}

fn blobs(n_per_class: usize, dim: usize, seed: u64) -> LabeledFeatures {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (class, centre) in [(GestureClass::Hit, -2.0), (GestureClass::Grab, 2.0)] {
        for _ in 0..n_per_class {
            rows.push((0..dim).map(|_| centre + 0.5 * gaussian(&mut rng)).collect());
            labels.push(class);
        }
    }
    LabeledFeatures::new(FeatureKind::ActivatedCount, rows, labels).unwrap()
}

fn sequences(n_per_class: usize, len: usize, seed: u64) -> LabeledFeatures {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..n_per_class {
        let level = rng.random_range(0.5..1.5);
        rows.push((0..len).map(|_| level + 0.05 * gaussian(&mut rng)).collect());
        labels.push(GestureClass::Grab);
        let freq = rng.random_range(0.15..0.3);
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        rows.push((0..len).map(|t| level + (freq * t as f64 + phase).sin() + 0.05 * gaussian(&mut rng)).collect());
        labels.push(GestureClass::Shake);
    }
    LabeledFeatures::new(FeatureKind::MaxTaxelTrace, rows, labels).unwrap()
}

fn quick(lr: f64, epochs: usize) -> TrainConfig {
    TrainConfig { learning_rate: lr, max_epochs: epochs, patience: epochs, ..TrainConfig::default() }
}

#[test]
fn mlp_fits_separable_blobs() {
    let data = blobs(60, 10, 1);
    let model = train_mlp(&data, &DenseNetConfig { train: quick(0.00025, 50), ..Default::default() }).unwrap();
    assert!(model.history().unwrap().epochs.len() <= 50);
    let report = evaluate(&model, &data).unwrap();
    assert_eq!(report.accuracy, 1.0);
}

#[test]
fn lstm_separates_constant_from_oscillating() {
    let train = sequences(60, 30, 2);
    let test = sequences(30, 30, 3);
    let config = LstmConfig { hidden: 16, train: quick(0.01, 80) };
    let model = train_lstm(&train, &config).unwrap();
    let acc = evaluate(&model, &test).unwrap().accuracy;
    assert!(acc >= 0.95, "accuracy {acc}");
}

#[test]
fn cnn_separates_constant_from_oscillating() {
    let train = sequences(40, 40, 4);
    let test = sequences(30, 40, 5);
    let config = CnnConfig { train: quick(0.001, 40), ..Default::default() };
    let model = train_cnn1d(&train, &config).unwrap();
    let acc = evaluate(&model, &test).unwrap().accuracy;
    assert!(acc >= 0.95, "accuracy {acc}");
}

#[test]
fn cnn_rejects_short_sequences() {
    let data = blobs(10, 8, 0);
    assert!(matches!(train_cnn1d(&data, &CnnConfig::default()), Err(LearnError::Unsupported { .. })));
}

#[test]
fn training_is_bit_identical_for_a_seed() {
    let data = blobs(30, 6, 7);
    let cfg = DenseNetConfig { train: TrainConfig { max_epochs: 8, seed: 42, ..TrainConfig::default() }, ..Default::default() };
    let a = train_mlp(&data, &cfg).unwrap();
    let b = train_mlp(&data, &cfg).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let c = train_mlp(&data, &DenseNetConfig { train: TrainConfig { seed: 43, ..cfg.train.clone() }, ..cfg }).unwrap();
    assert_ne!(a.to_json().unwrap(), c.to_json().unwrap());

    let rf = ForestConfig { seed: 5, ..Default::default() };
    assert_eq!(train_rf(&data, &rf).unwrap(), train_rf(&data, &rf).unwrap());
}

#[test]
fn history_tracks_best_epoch() {
    let data = blobs(30, 4, 9);
    let model = train_mlp(&data, &DenseNetConfig { train: quick(0.001, 15), ..Default::default() }).unwrap();
    let h = model.history().unwrap();
    let best = h.epochs.iter().map(|e| e.val_accuracy).fold(f64::MIN, f64::max);
    assert_eq!(h.best_val_accuracy, best);
    let lowest_loss = h
        .epochs
        .iter()
        .filter(|e| e.val_accuracy == best)
        .min_by(|a, b| a.val_loss.total_cmp(&b.val_loss))
        .unwrap();
    assert_eq!(h.best_epoch, lowest_loss.epoch);
}

#[test]
fn save_load_predictions_are_bit_identical() {
    let dir = std::env::temp_dir().join(format!("taxel-learn-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let data = sequences(12, 24, 11);
    let models = [
        train_mlp(&data, &DenseNetConfig { train: quick(0.001, 3), ..Default::default() }).unwrap(),
        train_lstm(&data, &LstmConfig { hidden: 6, train: quick(0.01, 2) }).unwrap(),
        train_cnn1d(&data, &CnnConfig { train: quick(0.001, 2), ..Default::default() }).unwrap(),
        train_rf(&data, &ForestConfig { n_trees: 7, ..Default::default() }).unwrap(),
    ];
    for model in &models {
        let path = dir.join(format!("{}.json", model.kind));
        model.save(&path).unwrap();
        let back = TrainedModel::load(&path).unwrap();
        assert_eq!(&back, model);
        for row in &data.rows {
            let a = model.predict_proba(row).unwrap();
            let b = back.predict_proba(row).unwrap();
            assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        }
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn kind_mismatch_is_rejected() {
    let data = blobs(10, 5, 0);
    let model = train_rf(&data, &ForestConfig { n_trees: 3, ..Default::default() }).unwrap();
    let other = LabeledFeatures { kind: FeatureKind::TaxelStd, ..data };
    assert!(matches!(evaluate(&model, &other), Err(LearnError::KindMismatch { .. })));
}

#[test]
fn exploding_learning_rate_reports_divergence() {
    let data = blobs(20, 5, 3);
    let cfg = DenseNetConfig { train: quick(1e300, 20), ..Default::default() };
    match train_mlp(&data, &cfg) {
        Err(LearnError::Divergence { epoch, loss }) => {
            assert!(epoch >= 1);
            assert!(!loss.is_finite());
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn single_class_data_trains() {
    let data = blobs(10, 5, 3);
    let only_hit: Vec<usize> = (0..10).collect();
    let data = data.select(&only_hit);
    let model = train_mlp(&data, &DenseNetConfig { train: quick(0.001, 60), ..Default::default() }).unwrap();
    assert_eq!(evaluate(&model, &data).unwrap().accuracy, 1.0);
}

#[test]
fn empty_data_is_a_config_error() {
    let empty = LabeledFeatures::new(FeatureKind::TaxelMean, vec![], vec![]).unwrap();
    assert!(matches!(train_rf(&empty, &ForestConfig::default()), Err(LearnError::Config(_))));
    assert!(matches!(train_mlp(&empty, &DenseNetConfig::default()), Err(LearnError::Config(_))));
}
