use std::net::SocketAddr;

pub type Result<T, E = StreamError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum StreamError {
    /// Bytes that do not form a valid message header or payload.
    #[error("protocol error: {0}")]
    Protocol(String),
    /// Input ended before a complete message.
    #[error("truncated message: need {needed} bytes, have {available}")]
    Framing { needed: usize, available: usize },
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot connect to {addr} after {attempts} attempts: {source}")]
    Connect {
        addr: SocketAddr,
        attempts: usize,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid stream configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] taxel_core::CoreError),
    #[error(transparent)]
    Learn(#[from] taxel_learn::LearnError),
    #[error(transparent)]
    Pipeline(#[from] taxel_pipeline::PipelineError),
}
