use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::json;
use taxel_core::io::{DATASET_FILE, SPLIT_FILE};
use taxel_core::{Dataset, SensorLayout, Split};
use taxel_learn::{ablation_run, evaluate, AblationConfig, LabeledFeatures, LearnError, TrainedModel};
use taxel_pipeline::{extract_all, FeatureKind, PipelineConfig};
use taxel_sensorsim::{run_characterization, skin_seed, synthesize_dataset, SkinModel, Synthesizer};
use taxel_stream::{classify_live, ClientOptions, FrameSource, ServeOptions, Server};

use crate::args::*;
use crate::config::{apply_pipeline, apply_training, FileConfig};
use crate::error::{CliError, Result};
use crate::manifest::{Manifest, MANIFEST_FILE};

pub const MODEL_FILE: &str = "model.json";

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth(a) => synth(&a),
        Command::Train(a) => train(&a),
        Command::Eval(a) => eval(&a),
        Command::Ablate(a) => ablate(&a),
        Command::Characterize(a) => characterize(&a),
        Command::Serve(a) => serve(&a),
        Command::Listen(a) => listen(&a),
    }
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Missing { path: path.to_path_buf() })
    }
}

fn out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn pretty(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Checks that a dataset directory exists and is split before loading it.
fn load_split_dataset(dir: &Path) -> Result<Dataset> {
    require_file(&dir.join(DATASET_FILE))?;
    require_file(&dir.join(SPLIT_FILE))?;
    let dataset = Dataset::load(dir)?;
    if !dataset.is_split() {
        return Err(CliError::Core(taxel_core::CoreError::InvalidDataset(format!(
            "{} has no train/test assignment",
            dir.display()
        ))));
    }
    Ok(dataset)
}

fn dataset_inputs(manifest: &mut Manifest, dir: &Path) -> Result<()> {
    manifest.input("dataset", &dir.join(DATASET_FILE))?;
    manifest.input("split", &dir.join(SPLIT_FILE))
}

fn model_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(MODEL_FILE)
    } else {
        path.to_path_buf()
    }
}

/// Pipeline precedence: flags, then the config file, then the pipeline
/// recorded next to the model, then defaults.
fn inherited_pipeline(file: &FileConfig, model: &Path, args: &PipelineArgs) -> Result<PipelineConfig> {
    let base = match &file.pipeline {
        Some(p) => p.clone(),
        None => {
            let recorded = model.parent().map(|d| d.join(MANIFEST_FILE)).filter(|p| p.is_file());
            match recorded {
                Some(p) => {
                    let m = Manifest::read(&p)?;
                    match m.config.get("pipeline") {
                        Some(v) => serde_json::from_value(v.clone()).map_err(|source| CliError::Json { path: p, source })?,
                        None => PipelineConfig::default(),
                    }
                }
                None => PipelineConfig::default(),
            }
        }
    };
    apply_pipeline(base, args)
}

fn features(dataset: &Dataset, split: Split, kind: FeatureKind, pipeline: &PipelineConfig) -> Result<LabeledFeatures> {
    let set = extract_all(kind, dataset.subset(split), pipeline)?;
    if set.dropped > 0 {
        log::warn!("{} {split} recordings have no contact and were skipped", set.dropped);
    }
    Ok(LabeledFeatures::try_from(&set)?)
}

fn synth(args: &SynthArgs) -> Result<()> {
    let file = FileConfig::load(args.config.config.as_deref())?;
    let seed = file.seed(args.seed)?;
    let mut config = file.synth;
    if let Some(n) = args.train_participants {
        config.n_train_participants = n;
    }
    if let Some(n) = args.test_participants {
        config.n_test_participants = n;
    }
    if args.noise_free {
        config = config.noise_free();
    }
    let layout = SensorLayout::skin();
    config.validate(&layout)?;

    out_dir(&args.out)?;
    let dataset = synthesize_dataset(&layout, &config, seed)?;
    dataset.save(&args.out)?;
    let config_path = args.out.join("synth_config.json");
    write_text(&config_path, &pretty(&config))?;

    let mut manifest = Manifest::new("synth", Some(seed), json!({ "synth": config }))?;
    manifest.output("dataset", &args.out.join(DATASET_FILE))?;
    manifest.output("split", &args.out.join(SPLIT_FILE))?;
    manifest.output("config", &config_path)?;
    manifest.write(&args.out)?;

    let (train, test) = (dataset.class_counts(Split::Train), dataset.class_counts(Split::Test));
    println!("wrote {} recordings to {} ({} train, {} test)", dataset.len(), args.out.display(), train.total(), test.total());
    Ok(())
}

fn train(args: &TrainArgs) -> Result<()> {
    let file = FileConfig::load(args.config.config.as_deref())?;
    let seed = file.seed(args.seed)?;
    let pipeline = apply_pipeline(file.pipeline.clone().unwrap_or_default(), &args.pipeline)?;
    let models = apply_training(file.models, args.model, &args.train, seed, args.parallel);
    let dataset = load_split_dataset(&args.data)?;
    out_dir(&args.out)?;

    let data = features(&dataset, Split::Train, args.feature, &pipeline)?;
    log::info!("training {} on {} {} vectors of width {}", args.model, data.len(), args.feature, data.width());
    let model = models.train(args.model, &data)?;

    let model_file = args.out.join(MODEL_FILE);
    model.save(&model_file)?;
    let model_config = match args.model {
        taxel_learn::ModelKind::Mlp => serde_json::to_value(&models.mlp),
        taxel_learn::ModelKind::Lstm => serde_json::to_value(&models.lstm),
        taxel_learn::ModelKind::Cnn1d => serde_json::to_value(&models.cnn1d),
        taxel_learn::ModelKind::Rf => serde_json::to_value(&models.rf),
    }
    .expect("config serializes");
    let mut manifest = Manifest::new(
        "train",
        Some(seed),
        json!({ "model": args.model, "feature": args.feature, "pipeline": pipeline, "model_config": model_config }),
    )?;
    dataset_inputs(&mut manifest, &args.data)?;
    manifest.output("model", &model_file)?;
    if let Some(history) = model.history() {
        let path = args.out.join("history.json");
        write_text(&path, &pretty(history))?;
        manifest.output("history", &path)?;
        println!(
            "trained {} on {} samples: best epoch {} of {}, val accuracy {:.4}",
            args.model,
            data.len(),
            history.best_epoch,
            history.epochs.len(),
            history.best_val_accuracy
        );
    } else {
        println!("trained {} on {} samples", args.model, data.len());
    }
    manifest.write(&args.out)?;
    Ok(())
}

fn eval(args: &EvalArgs) -> Result<()> {
    let file = FileConfig::load(args.config.config.as_deref())?;
    let model_file = model_path(&args.model);
    require_file(&model_file)?;
    let pipeline = inherited_pipeline(&file, &model_file, &args.pipeline)?;
    let model = TrainedModel::load(&model_file)?;
    let kind = args.feature.unwrap_or(model.feature_kind);
    if kind != model.feature_kind {
        return Err(LearnError::KindMismatch { expected: model.feature_kind, got: kind }.into());
    }
    let dataset = load_split_dataset(&args.data)?;
    out_dir(&args.out)?;

    let split = if args.on_train { Split::Train } else { Split::Test };
    let data = features(&dataset, split, kind, &pipeline)?;
    let report = evaluate(&model, &data)?;

    let paths = [args.out.join("report.json"), args.out.join("report.txt"), args.out.join("confusion.svg")];
    write_text(&paths[0], &pretty(&report))?;
    write_text(&paths[1], &report.render_table())?;
    write_text(&paths[2], &report.to_svg())?;

    let mut manifest =
        Manifest::new("eval", None, json!({ "split": split, "feature": kind, "model": model.kind, "pipeline": pipeline }))?;
    dataset_inputs(&mut manifest, &args.data)?;
    manifest.input("model", &model_file)?;
    for (role, path) in ["report", "table", "figure"].into_iter().zip(&paths) {
        manifest.output(role, path)?;
    }
    manifest.write(&args.out)?;
    print!("{}", report.render_table());
    Ok(())
}

fn ablate(args: &AblateArgs) -> Result<()> {
    let file = FileConfig::load(args.config.config.as_deref())?;
    let seed = file.seed(args.seed)?;
    let pipeline = apply_pipeline(file.pipeline.clone().unwrap_or_default(), &args.pipeline)?;
    let models = apply_training(file.models, taxel_learn::ModelKind::Mlp, &args.train, seed, false);
    let dataset = load_split_dataset(&args.data)?;
    out_dir(&args.out)?;

    let config = AblationConfig { pipeline, mlp: models.mlp, parallel: args.parallel };
    let table = ablation_run(&dataset, &FeatureKind::ALL, &config)?;
    let paths = [args.out.join("ablation.json"), args.out.join("ablation.txt")];
    write_text(&paths[0], &pretty(&table))?;
    write_text(&paths[1], &table.render())?;

    // `parallel` changes scheduling only, so it stays out of the manifest.
    let mut manifest = Manifest::new("ablate", Some(seed), json!({ "pipeline": config.pipeline, "mlp": config.mlp }))?;
    dataset_inputs(&mut manifest, &args.data)?;
    manifest.output("table", &paths[0])?;
    manifest.output("text", &paths[1])?;
    manifest.write(&args.out)?;
    print!("{}", table.render());
    Ok(())
}

fn characterize(args: &CharacterizeArgs) -> Result<()> {
    let file = FileConfig::load(args.config.config.as_deref())?;
    let seed = file.seed(args.seed)?;
    let mut synth = file.synth;
    let mut protocol = file.characterize;
    if let Some(n) = args.repetitions {
        protocol.repetitions = n;
    }
    if let Some(t) = &args.taxels {
        protocol.taxels = t.clone();
    }
    if args.noise_free {
        synth = synth.noise_free();
        protocol.force_noise_n = 0.0;
    }
    let layout = SensorLayout::skin();
    protocol.validate(&layout)?;
    let skin = SkinModel::sample(&layout, &synth.skin, skin_seed(seed))?;
    out_dir(&args.out)?;

    let report = run_characterization(&layout, &skin, &protocol, seed)?;
    let paths = [args.out.join("curve.csv"), args.out.join("summary.json"), args.out.join("summary.txt")];
    let csv = File::create(&paths[0]).map_err(|e| CliError::io(&paths[0], e))?;
    report.write_curve_csv(BufWriter::new(csv))?;
    write_text(&paths[1], &(report.summary_json() + "\n"))?;
    write_text(&paths[2], &report.render())?;

    let mut manifest = Manifest::new("characterize", Some(seed), json!({ "skin": synth.skin, "protocol": protocol }))?;
    for (role, path) in ["curve", "summary", "text"].into_iter().zip(&paths) {
        manifest.output(role, path)?;
    }
    manifest.write(&args.out)?;
    print!("{}", report.render());
    Ok(())
}

fn serve(args: &ServeArgs) -> Result<()> {
    let file = FileConfig::load(args.config.config.as_deref())?;
    let layout = SensorLayout::skin();
    let (source, native_rate) = match &args.data {
        Some(dir) => {
            let dataset = load_split_dataset(dir)?;
            let split = if args.on_train { Split::Train } else { Split::Test };
            let recordings: Vec<_> = dataset.subset(split).into_iter().cloned().collect();
            let rate = recordings.first().map_or(file.synth.sample_rate_hz, |r| r.sample_rate_hz());
            log::info!("replaying {} {split} recordings", recordings.len());
            (FrameSource::replay(&recordings, args.gap, rate)?, rate)
        }
        None => {
            let rate = file.synth.sample_rate_hz;
            let synth = Synthesizer::new(layout.clone(), file.synth, skin_seed(args.seed))?;
            (FrameSource::Synth { synth: Arc::new(synth), seed: args.seed, idle_gap_s: args.gap }, rate)
        }
    };
    let options = ServeOptions { rate_hz: args.rate.unwrap_or(native_rate), repeat: args.repeat, max_connections: args.max_connections };
    let server = Server::bind(args.addr.as_str(), layout)?;
    println!("listening on {}", server.local_addr()?);
    let _ = std::io::stdout().flush();
    let served = server.run(source, &options)?;
    log::info!("served {served} connection(s)");
    Ok(())
}

fn listen(args: &ListenArgs) -> Result<()> {
    let file = FileConfig::load(args.config.config.as_deref())?;
    let model_file = model_path(&args.model);
    require_file(&model_file)?;
    let pipeline = inherited_pipeline(&file, &model_file, &args.pipeline)?;
    let model = TrainedModel::load(&model_file)?;
    let mut segmenter = file.segmenter;
    if let Some(n) = args.onset {
        segmenter.onset_frames = n;
    }
    if let Some(n) = args.offset {
        segmenter.offset_frames = n;
    }
    if let Some(n) = args.min_frames {
        segmenter.min_segment_frames = n;
    }
    segmenter.validate()?;
    let mut options = ClientOptions { segmenter: segmenter.clone(), ..ClientOptions::default() };
    if let Some(n) = args.max_reconnects {
        options.max_reconnects = n;
    }

    let events_path = args.out.as_ref().map(|d| d.join("events.jsonl"));
    let mut events = match &events_path {
        Some(p) => {
            out_dir(p.parent().expect("joined path"))?;
            Some(BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?))
        }
        None => None,
    };
    let stdout = std::io::stdout();
    let stats = classify_live(args.addr, &model, &pipeline, &options, |event| {
        let line = serde_json::to_string(event).expect("event serializes");
        let mut out = stdout.lock();
        let _ = writeln!(out, "{line}");
        let _ = out.flush();
        if let Some(w) = events.as_mut() {
            writeln!(w, "{line}")?;
        }
        Ok(())
    })?;
    log::info!("{stats:?}");

    if let (Some(dir), Some(path), Some(mut w)) = (&args.out, &events_path, events) {
        w.flush().map_err(|e| CliError::io(path, e))?;
        drop(w);
        let stats_path = dir.join("stats.json");
        write_text(&stats_path, &pretty(&stats))?;
        let mut manifest = Manifest::new("listen", None, json!({ "pipeline": pipeline, "segmenter": segmenter }))?;
        manifest.input("model", &model_file)?;
        manifest.output("events", path)?;
        manifest.output("stats", &stats_path)?;
        manifest.write(dir)?;
    }
    Ok(())
}
