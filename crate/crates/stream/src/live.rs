//! Client side: receive frames, segment contacts and classify each segment.

use std::io::{ErrorKind, Read};
use std::net::{SocketAddr, TcpStream};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use taxel_core::{GestureClass, GestureRecording, RecordingMeta, Section, SensorLayout, TaxelFrame};
use taxel_learn::TrainedModel;
use taxel_pipeline::{extract, PipelineConfig};

use crate::error::{Result, StreamError};
use crate::protocol::{FrameAssembler, FrameDecoder};
use crate::segment::{Segmenter, SegmenterConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiveEvent {
    /// Stream time of the first and last segment frame, in s.
    pub timestamp: f64,
    pub end_timestamp: f64,
    pub class: GestureClass,
    pub class_code: usize,
    pub probabilities: Vec<f64>,
    pub segment_frames: usize,
    /// Set on the first event after a reconnect.
    pub gap: bool,
}

/// Section carrying most of the pressure; decides the recording's arm tag.
fn dominant_section(frames: &[TaxelFrame], layout: &SensorLayout) -> Section {
    let total = |s: Section| -> u64 {
        let range = layout.range(s).unwrap_or(0..0);
        frames.iter().map(|f| f.readings()[range.clone()].iter().map(|&r| r as u64).sum::<u64>()).sum()
    };
    if total(Section::Lower) > total(Section::Upper) {
        Section::Lower
    } else {
        Section::Upper
    }
}

/// Runs the offline feature pipeline and model on one segment.
pub fn classify_segment(
    model: &TrainedModel,
    pipeline: &PipelineConfig,
    layout: &SensorLayout,
    frames: Vec<TaxelFrame>,
) -> Result<LiveEvent> {
    let (timestamp, end_timestamp) = (frames[0].timestamp(), frames[frames.len() - 1].timestamp());
    let segment_frames = frames.len();
    let meta = RecordingMeta {
        label: None,
        participant_id: "live".into(),
        arm_section: dominant_section(&frames, layout),
        trial_index: 0,
        sample_rate_hz: pipeline.sample_rate_hz,
    };
    let rec = GestureRecording::new(frames, meta)?;
    let features = extract(model.feature_kind, &rec, pipeline)?;
    let probabilities = model.predict_vector(&features)?;
    let class_code = model.predict(features.values())?;
    Ok(LiveEvent {
        timestamp,
        end_timestamp,
        class: GestureClass::from_code(class_code).expect("model emits valid codes"),
        class_code,
        probabilities,
        segment_frames,
        gap: false,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientOptions {
    pub segmenter: SegmenterConfig,
    /// Reconnects after the connection ends; 0 returns at the first end of stream.
    pub max_reconnects: usize,
    pub initial_backoff: Duration,
    pub max_backoff: Duration,
    /// Connection attempts before giving up on the first connection.
    pub connect_attempts: usize,
}

impl Default for ClientOptions {
    fn default() -> Self {
        Self {
            segmenter: SegmenterConfig::default(),
            max_reconnects: 5,
            initial_backoff: Duration::from_millis(250),
            max_backoff: Duration::from_secs(8),
            connect_attempts: 5,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiveStats {
    pub frames: usize,
    pub events: usize,
    pub decode_errors: usize,
    pub out_of_order: usize,
    pub incomplete_frames: usize,
    pub short_segments: usize,
    pub reconnects: usize,
}

fn connect(addr: SocketAddr, options: &ClientOptions) -> Result<TcpStream> {
    let mut backoff = options.initial_backoff;
    let mut attempt = 0;
    loop {
        attempt += 1;
        match TcpStream::connect(addr) {
            Ok(s) => return Ok(s),
            Err(source) if attempt >= options.connect_attempts.max(1) => {
                return Err(StreamError::Connect { addr, attempts: attempt, source })
            }
            Err(e) => {
                log::warn!("connect to {addr} failed ({e}), retrying in {backoff:?}");
                thread::sleep(backoff);
                backoff = (backoff * 2).min(options.max_backoff);
            }
        }
    }
}

/// How a session ended.
enum End {
    Closed,
    Lost,
}

struct Session<'a, F> {
    model: &'a TrainedModel,
    pipeline: &'a PipelineConfig,
    layout: SensorLayout,
    sink: F,
    stats: LiveStats,
    gap: bool,
}

impl<F: FnMut(&LiveEvent) -> Result<()>> Session<'_, F> {
    fn emit(&mut self, frames: Vec<TaxelFrame>) -> Result<()> {
        let mut event = classify_segment(self.model, self.pipeline, &self.layout, frames)?;
        event.gap = std::mem::take(&mut self.gap);
        self.stats.events += 1;
        (self.sink)(&event)
    }

    fn run(&mut self, mut stream: TcpStream, segmenter: &mut Segmenter) -> Result<End> {
        let mut decoder = FrameDecoder::new();
        let mut assembler = FrameAssembler::new(self.layout.clone());
        let mut buf = vec![0u8; 64 * 1024];
        let end = loop {
            let n = match stream.read(&mut buf) {
                Ok(0) => break End::Closed,
                Ok(n) => n,
                Err(e) if e.kind() == ErrorKind::Interrupted => continue,
                Err(e) => {
                    log::warn!("connection lost: {e}");
                    break End::Lost;
                }
            };
            decoder.push(&buf[..n]);
            while let Some(msg) = decoder.next_message() {
                let frame = match msg.and_then(|m| assembler.push(m)) {
                    Ok(Some(f)) => f,
                    Ok(None) => continue,
                    Err(e) => {
                        self.stats.decode_errors += 1;
                        log::warn!("{e}");
                        continue;
                    }
                };
                self.stats.frames += 1;
                if let Some(seg) = segmenter.push(frame) {
                    self.emit(seg)?;
                }
            }
        };
        if let Err(e) = decoder.finish() {
            self.stats.decode_errors += 1;
            log::warn!("stream ended mid-message: {e}");
        }
        self.stats.incomplete_frames += assembler.incomplete();
        Ok(end)
    }
}

/// Connects to a frame server and calls `sink` for every classified segment,
/// in segment-close order. A cleanly closed stream flushes the open segment;
/// a lost connection discards it. Either way the client reconnects up to
/// `max_reconnects` times and returns normally once the server stays away.
pub fn classify_live<F>(
    addr: SocketAddr,
    model: &TrainedModel,
    pipeline: &PipelineConfig,
    options: &ClientOptions,
    sink: F,
) -> Result<LiveStats>
where
    F: FnMut(&LiveEvent) -> Result<()>,
{
    pipeline.validate()?;
    let mut segmenter = Segmenter::new(options.segmenter.clone())?;
    let mut session = Session { model, pipeline, layout: SensorLayout::skin(), sink, stats: LiveStats::default(), gap: false };
    let mut backoff = options.initial_backoff;
    let mut connected_once = false;
    loop {
        // Failing the first connection is an error; failing to come back
        // after a served session means the server is gone for good.
        let stream = match connect(addr, options) {
            Ok(s) => s,
            Err(e) if connected_once => {
                log::warn!("giving up: {e}");
                break;
            }
            Err(e) => return Err(e),
        };
        connected_once = true;
        let end = session.run(stream, &mut segmenter)?;
        match end {
            End::Closed => {
                if let Some(seg) = segmenter.flush() {
                    session.emit(seg)?;
                }
            }
            End::Lost => {}
        }
        session.stats.out_of_order += segmenter.out_of_order();
        session.stats.short_segments += segmenter.too_short();
        segmenter = Segmenter::new(options.segmenter.clone())?;
        if session.stats.reconnects >= options.max_reconnects {
            break;
        }
        session.stats.reconnects += 1;
        session.gap = true;
        log::info!("reconnecting in {backoff:?}");
        thread::sleep(backoff);
        backoff = (backoff * 2).min(options.max_backoff);
    }
    Ok(session.stats)
}
