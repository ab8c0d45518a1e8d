//! Online contact segmentation: debounced onset, inactivity-window offset.

use serde::{Deserialize, Serialize};
use taxel_core::TaxelFrame;

use crate::error::{Result, StreamError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmenterConfig {
    pub activation_threshold: u16,
    /// Consecutive active frames that open a segment.
    pub onset_frames: usize,
    /// Consecutive inactive frames that close it (0.5 s at 50 Hz).
    pub offset_frames: usize,
    pub min_segment_frames: usize,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        Self { activation_threshold: 10, onset_frames: 2, offset_frames: 25, min_segment_frames: 5 }
    }
}

impl SegmenterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.onset_frames == 0 || self.offset_frames == 0 {
            return Err(StreamError::Config("onset_frames and offset_frames must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Idle,
    Active,
}

#[derive(Debug)]
pub struct Segmenter {
    config: SegmenterConfig,
    phase: Phase,
    /// Idle: the current run of active frames. Active: the open segment.
    buffer: Vec<TaxelFrame>,
    inactive_run: usize,
    last_timestamp: Option<f64>,
    out_of_order: usize,
    too_short: usize,
}

impl Segmenter {
    pub fn new(config: SegmenterConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            phase: Phase::Idle,
            buffer: Vec::new(),
            inactive_run: 0,
            last_timestamp: None,
            out_of_order: 0,
            too_short: 0,
        })
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Frames dropped because their timestamp did not increase.
    pub fn out_of_order(&self) -> usize {
        self.out_of_order
    }

    /// Closed segments discarded for being shorter than the minimum.
    pub fn too_short(&self) -> usize {
        self.too_short
    }

    /// Feeds one frame; returns a segment when this frame closes one.
    pub fn push(&mut self, frame: TaxelFrame) -> Option<Vec<TaxelFrame>> {
        if self.last_timestamp.is_some_and(|t| frame.timestamp() <= t) {
            self.out_of_order += 1;
            log::warn!("dropping out-of-order frame at {:.6} s", frame.timestamp());
            return None;
        }
        self.last_timestamp = Some(frame.timestamp());
        let active = frame.is_active(self.config.activation_threshold);
        match self.phase {
            Phase::Idle => {
                if !active {
                    self.buffer.clear();
                    return None;
                }
                self.buffer.push(frame);
                if self.buffer.len() >= self.config.onset_frames {
                    self.phase = Phase::Active;
                    self.inactive_run = 0;
                }
                None
            }
            Phase::Active => {
                self.buffer.push(frame);
                if active {
                    self.inactive_run = 0;
                    return None;
                }
                self.inactive_run += 1;
                if self.inactive_run >= self.config.offset_frames {
                    self.close()
                } else {
                    None
                }
            }
        }
    }

    fn close(&mut self) -> Option<Vec<TaxelFrame>> {
        let mut frames = std::mem::take(&mut self.buffer);
        frames.truncate(frames.len() - self.inactive_run);
        self.phase = Phase::Idle;
        self.inactive_run = 0;
        if frames.len() < self.config.min_segment_frames {
            self.too_short += 1;
            return None;
        }
        Some(frames)
    }

    /// Ends the stream, closing an open segment.
    pub fn flush(&mut self) -> Option<Vec<TaxelFrame>> {
        match self.phase {
            Phase::Active => self.close(),
            Phase::Idle => {
                self.buffer.clear();
                None
            }
        }
    }

    /// Forgets any partial state, e.g. after a lost connection.
    pub fn reset(&mut self) {
        self.phase = Phase::Idle;
        self.buffer.clear();
        self.inactive_run = 0;
        self.last_timestamp = None;
    }
}

/// Runs a whole frame sequence through a fresh segmenter.
pub fn segment_frames<I>(frames: I, config: &SegmenterConfig) -> Result<Vec<Vec<TaxelFrame>>>
where
    I: IntoIterator<Item = TaxelFrame>,
{
    let mut seg = Segmenter::new(config.clone())?;
    let mut out: Vec<Vec<TaxelFrame>> = frames.into_iter().filter_map(|f| seg.push(f)).collect();
    out.extend(seg.flush());
    Ok(out)
}
