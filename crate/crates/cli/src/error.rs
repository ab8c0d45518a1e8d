use std::path::PathBuf;

use serde_json::json;
use taxel_learn::LearnError;
use taxel_pipeline::PipelineError;
use taxel_sensorsim::SimError;
use taxel_stream::StreamError;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: not found")]
    Missing { path: PathBuf },
    #[error(transparent)]
    Core(#[from] taxel_core::CoreError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// Process exit codes, one per failure family.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const CONFIG: i32 = 3;
    pub const IO: i32 = 4;
    pub const KIND_MISMATCH: i32 = 5;
    pub const DIVERGENCE: i32 = 6;
    pub const DATA: i32 = 7;
    pub const NETWORK: i32 = 8;
}

fn learn_code(e: &LearnError) -> (i32, &'static str) {
    match e {
        LearnError::KindMismatch { .. } => (exit::KIND_MISMATCH, "kind_mismatch"),
        LearnError::Divergence { .. } => (exit::DIVERGENCE, "divergence"),
        LearnError::Config(_) | LearnError::Unsupported { .. } => (exit::CONFIG, "config"),
        LearnError::Feature { source, .. } => learn_code(source),
        LearnError::Io(_) => (exit::IO, "io"),
        LearnError::Serde(_) => (exit::DATA, "model_format"),
        LearnError::Shape(_) | LearnError::Pipeline(_) | LearnError::Core(_) => (exit::DATA, "data"),
    }
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn code(&self) -> (i32, &'static str) {
        match self {
            CliError::Usage(_) => (exit::USAGE, "usage"),
            CliError::Config(_) => (exit::CONFIG, "config"),
            CliError::Io { .. } | CliError::Missing { .. } => (exit::IO, "io"),
            CliError::Json { .. } => (exit::CONFIG, "config_format"),
            CliError::Core(taxel_core::CoreError::Io { .. }) => (exit::IO, "io"),
            CliError::Core(taxel_core::CoreError::Config(_)) => (exit::CONFIG, "config"),
            CliError::Core(_) => (exit::DATA, "data"),
            CliError::Pipeline(PipelineError::Config(_)) => (exit::CONFIG, "config"),
            CliError::Pipeline(PipelineError::Io(_)) => (exit::IO, "io"),
            CliError::Pipeline(_) => (exit::DATA, "data"),
            CliError::Learn(e) => learn_code(e),
            CliError::Sim(SimError::Io { .. }) => (exit::IO, "io"),
            CliError::Sim(SimError::Core(_)) => (exit::DATA, "data"),
            CliError::Sim(_) => (exit::CONFIG, "config"),
            CliError::Stream(StreamError::Learn(e)) => learn_code(e),
            CliError::Stream(StreamError::Config(_)) => (exit::CONFIG, "config"),
            CliError::Stream(StreamError::Pipeline(_) | StreamError::Core(_)) => (exit::DATA, "data"),
            CliError::Stream(_) => (exit::NETWORK, "network"),
        }
    }

    pub fn to_json(&self) -> String {
        let (code, kind) = self.code();
        json!({ "error": { "kind": kind, "exit_code": code, "message": self.to_string() } }).to_string()
    }
}
