use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use taxel_learn::ModelKind;
use taxel_pipeline::FeatureKind;

const DEFAULTS: &str = "\
Defaults:
  activation threshold     10 counts (a taxel is active above it)
  feature length           150 frames (clip or zero-pad)
  smoothing window         3 frames (ablation features)
  sample rate              50 Hz
  learning rate            0.00025 (MLP, Adam)
  random forest            60 trees, sqrt(features) per split
  synthetic dataset        10 train + 6 test participants, 900 / 180 gestures

Every subcommand accepts --config FILE, a JSON document with optional
sections \"seed\", \"pipeline\", \"models\", \"synth\", \"characterize\" and
\"segmenter\". Command-line flags override values from the file.

Exit codes: 0 ok, 1 internal, 2 usage, 3 config, 4 io, 5 feature kind
mismatch, 6 training divergence, 7 data, 8 network. Failures print a JSON
object {\"error\": {...}} as the last line on stderr.";

#[derive(Debug, Parser)]
#[command(name = "taxel", version, about = "Social touch gesture recognition on a knitted tactile skin", after_help = DEFAULTS)]
pub struct Cli {
    /// Log verbosity (-v info, -vv debug); RUST_LOG takes precedence.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a participant-split synthetic gesture dataset.
    Synth(SynthArgs),
    /// Train a classifier on the train split of a dataset.
    Train(TrainArgs),
    /// Evaluate a trained model on a dataset split.
    Eval(EvalArgs),
    /// Compare the activated-count feature against four alternatives.
    Ablate(AblateArgs),
    /// Simulate indentation tests and report per-taxel force ranges.
    Characterize(CharacterizeArgs),
    /// Stream frames over TCP from a dataset or live synthesis.
    Serve(ServeArgs),
    /// Connect to a frame server and classify gestures as they end.
    Listen(ListenArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArg {
    /// JSON configuration file; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PipelineArgs {
    /// Activation threshold in counts [default: 10]
    #[arg(long, value_name = "COUNTS")]
    pub threshold: Option<u16>,
    /// Feature length in frames [default: 150]
    #[arg(long, value_name = "N")]
    pub frames: Option<usize>,
    /// Moving-average window for ablation features [default: 3]
    #[arg(long, value_name = "N")]
    pub window: Option<usize>,
    /// Sensor sample rate in Hz [default: 50]
    #[arg(long, value_name = "HZ")]
    pub sample_rate: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Seed for skin, participant styles and gesture noise (required here or in the config file).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Participants in the train split [default: 10]
    #[arg(long, value_name = "N")]
    pub train_participants: Option<usize>,
    /// Participants in the test split [default: 6]
    #[arg(long, value_name = "N")]
    pub test_participants: Option<usize>,
    /// Disable sensor noise.
    #[arg(long)]
    pub noise_free: bool,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TrainOverrides {
    /// Learning rate of the selected model [default: 0.00025 for mlp]
    #[arg(long, value_name = "RATE")]
    pub lr: Option<f64>,
    /// Maximum training epochs [default: 300]
    #[arg(long, value_name = "N")]
    pub epochs: Option<usize>,
    /// Mini-batch size [default: 32]
    #[arg(long, value_name = "N")]
    pub batch_size: Option<usize>,
    /// Early-stopping patience in epochs [default: 20]
    #[arg(long, value_name = "N")]
    pub patience: Option<usize>,
    /// Random forest size [default: 60]
    #[arg(long, value_name = "N")]
    pub trees: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Dataset directory written by `synth`.
    #[arg(long, value_name = "DIR")]
    pub data: PathBuf,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Seed for initialization, the validation split and batching (required here or in the config file).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Model family.
    #[arg(long, default_value = "mlp", value_parser = parse_model)]
    pub model: ModelKind,
    /// Input feature.
    #[arg(long, default_value = "activated-count", value_parser = parse_feature)]
    pub feature: FeatureKind,
    /// Train random forest trees on all cores.
    #[arg(long)]
    pub parallel: bool,
    #[command(flatten)]
    pub train: TrainOverrides,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Dataset directory written by `synth`.
    #[arg(long, value_name = "DIR")]
    pub data: PathBuf,
    /// Model file, or a directory containing model.json.
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Feature to extract; must match the model's.
    #[arg(long, value_parser = parse_feature)]
    pub feature: Option<FeatureKind>,
    /// Evaluate on the train split instead of test.
    #[arg(long)]
    pub on_train: bool,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Clone, Args)]
pub struct AblateArgs {
    /// Dataset directory written by `synth`.
    #[arg(long, value_name = "DIR")]
    pub data: PathBuf,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Seed for every network in the comparison.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Train the five networks concurrently.
    #[arg(long)]
    pub parallel: bool,
    #[command(flatten)]
    pub train: TrainOverrides,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Clone, Args)]
pub struct CharacterizeArgs {
    /// Seed of the simulated skin (same skin as `synth --seed`) and the test noise.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Indentations per taxel [default: 10]
    #[arg(long, value_name = "N")]
    pub repetitions: Option<usize>,
    /// Taxel indices to test, comma separated [default: 6,13,22,29,40,45,52,58]
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub taxels: Option<Vec<usize>>,
    /// Disable sensor and force-gauge noise.
    #[arg(long)]
    pub noise_free: bool,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    /// Listen address; port 0 picks a free port.
    #[arg(long, default_value = "127.0.0.1:7878")]
    pub addr: String,
    /// Replay this dataset's recordings.
    #[arg(long, value_name = "DIR", conflicts_with = "synth", required_unless_present = "synth")]
    pub data: Option<PathBuf>,
    /// Generate endless random gestures instead of replaying a dataset.
    #[arg(long)]
    pub synth: bool,
    /// Replay the train split instead of test.
    #[arg(long, requires = "data")]
    pub on_train: bool,
    /// Seed for live synthesis.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Frame rate in Hz [default: 50]
    #[arg(long, value_name = "HZ")]
    pub rate: Option<f64>,
    /// Idle time between gestures in seconds.
    #[arg(long, default_value_t = 1.0, value_name = "S")]
    pub gap: f64,
    /// Restart the replay when it ends.
    #[arg(long = "loop")]
    pub repeat: bool,
    /// Exit after serving this many connections.
    #[arg(long, value_name = "N")]
    pub max_connections: Option<usize>,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Clone, Args)]
pub struct ListenArgs {
    /// Frame server address.
    #[arg(long, default_value = "127.0.0.1:7878")]
    pub addr: SocketAddr,
    /// Model file, or a directory containing model.json.
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// Also write events.jsonl and a manifest to this directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Reconnection attempts after a lost stream [default: 5]
    #[arg(long, value_name = "N")]
    pub max_reconnects: Option<usize>,
    /// Active frames that open a segment [default: 2]
    #[arg(long, value_name = "N")]
    pub onset: Option<usize>,
    /// Inactive frames that close a segment [default: 25]
    #[arg(long, value_name = "N")]
    pub offset: Option<usize>,
    /// Shortest segment that is classified [default: 5]
    #[arg(long, value_name = "N")]
    pub min_frames: Option<usize>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[command(flatten)]
    pub config: ConfigArg,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: taxel_learn::LearnError| e.to_string())
}

fn parse_feature(s: &str) -> Result<FeatureKind, String> {
    s.parse()
}
