//! Streaming of taxel frames over TCP and online gesture classification.

pub mod error;
pub mod live;
pub mod protocol;
pub mod segment;
pub mod server;

pub use error::{Result, StreamError};
pub use live::{classify_live, classify_segment, ClientOptions, LiveEvent, LiveStats};
pub use protocol::{decode_frame, encode_frame, split_frame, FrameAssembler, FrameDecoder, FrameMessage, HEADER_LEN, MAGIC, VERSION};
pub use segment::{segment_frames, Phase, Segmenter, SegmenterConfig};
pub use server::{FrameSource, ServeOptions, Server};
