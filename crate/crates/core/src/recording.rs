use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::gesture::GestureClass;
use crate::layout::{Section, TAXEL_COUNT};

/// Largest reading of the 10-bit converter.
pub const ADC_MAX: u16 = 1023;

/// One time-stamped snapshot of all taxel readings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFrame")]
pub struct TaxelFrame {
    timestamp: f64,
    readings: Vec<u16>,
}

#[derive(Deserialize)]
struct RawFrame {
    timestamp: f64,
    readings: Vec<u16>,
}

impl TryFrom<RawFrame> for TaxelFrame {
    type Error = CoreError;

    fn try_from(raw: RawFrame) -> Result<Self> {
        TaxelFrame::new(raw.timestamp, raw.readings)
    }
}

impl TaxelFrame {
    pub fn new(timestamp: f64, readings: Vec<u16>) -> Result<Self> {
        if !timestamp.is_finite() {
            return Err(CoreError::InvalidFrame(format!("non-finite timestamp {timestamp}")));
        }
        if readings.len() != TAXEL_COUNT {
            return Err(CoreError::InvalidFrame(format!(
                "expected {TAXEL_COUNT} readings, got {}",
                readings.len()
            )));
        }
        if let Some((i, v)) = readings.iter().enumerate().find(|(_, &v)| v > ADC_MAX) {
            return Err(CoreError::InvalidFrame(format!("taxel {i} reading {v} exceeds {ADC_MAX}")));
        }
        Ok(Self { timestamp, readings })
    }

    /// All-zero frame, used for padding and idle periods.
    pub fn zeros(timestamp: f64) -> Self {
        Self { timestamp, readings: vec![0; TAXEL_COUNT] }
    }

    pub fn timestamp(&self) -> f64 {
        self.timestamp
    }

    pub fn readings(&self) -> &[u16] {
        &self.readings
    }

    pub fn with_timestamp(&self, timestamp: f64) -> Self {
        Self { timestamp, readings: self.readings.clone() }
    }

    /// Number of taxels whose reading is strictly greater than `threshold`.
    pub fn activated_count(&self, threshold: u16) -> usize {
        self.readings.iter().filter(|&&v| v > threshold).count()
    }

    pub fn is_active(&self, threshold: u16) -> bool {
        self.readings.iter().any(|&v| v > threshold)
    }
}

/// Everything about a recording except its frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingMeta {
    pub label: Option<GestureClass>,
    pub participant_id: String,
    pub arm_section: Section,
    pub trial_index: u32,
    pub sample_rate_hz: f64,
}

/// An ordered, non-empty frame sequence with its labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRecording")]
pub struct GestureRecording {
    frames: Vec<TaxelFrame>,
    label: Option<GestureClass>,
    participant_id: String,
    arm_section: Section,
    trial_index: u32,
    sample_rate_hz: f64,
}

#[derive(Deserialize)]
struct RawRecording {
    frames: Vec<TaxelFrame>,
    label: Option<GestureClass>,
    participant_id: String,
    arm_section: Section,
    trial_index: u32,
    sample_rate_hz: f64,
}

impl TryFrom<RawRecording> for GestureRecording {
    type Error = CoreError;

    fn try_from(raw: RawRecording) -> Result<Self> {
        GestureRecording::new(
            raw.frames,
            RecordingMeta {
                label: raw.label,
                participant_id: raw.participant_id,
                arm_section: raw.arm_section,
                trial_index: raw.trial_index,
                sample_rate_hz: raw.sample_rate_hz,
            },
        )
    }
}

impl GestureRecording {
    pub fn new(frames: Vec<TaxelFrame>, meta: RecordingMeta) -> Result<Self> {
        if frames.is_empty() {
            return Err(CoreError::InvalidRecording("recording has no frames".into()));
        }
        if let Some(i) = frames.windows(2).position(|w| w[1].timestamp <= w[0].timestamp) {
            return Err(CoreError::InvalidRecording(format!(
                "timestamps not strictly increasing at frame {}",
                i + 1
            )));
        }
        if !(meta.sample_rate_hz.is_finite() && meta.sample_rate_hz > 0.0) {
            return Err(CoreError::InvalidRecording(format!(
                "sample rate must be positive, got {}",
                meta.sample_rate_hz
            )));
        }
        Ok(Self {
            frames,
            label: meta.label,
            participant_id: meta.participant_id,
            arm_section: meta.arm_section,
            trial_index: meta.trial_index,
            sample_rate_hz: meta.sample_rate_hz,
        })
    }

    pub fn frames(&self) -> &[TaxelFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn label(&self) -> Option<GestureClass> {
        self.label
    }

    pub fn participant_id(&self) -> &str {
        &self.participant_id
    }

    pub fn arm_section(&self) -> Section {
        self.arm_section
    }

    pub fn trial_index(&self) -> u32 {
        self.trial_index
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn duration(&self) -> f64 {
        let first = self.frames[0].timestamp;
        let last = self.frames[self.frames.len() - 1].timestamp;
        last - first + 1.0 / self.sample_rate_hz
    }

    pub fn meta(&self) -> RecordingMeta {
        RecordingMeta {
            label: self.label,
            participant_id: self.participant_id.clone(),
            arm_section: self.arm_section,
            trial_index: self.trial_index,
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    /// Same metadata, different frames.
    pub fn with_frames(&self, frames: Vec<TaxelFrame>) -> Result<Self> {
        Self::new(frames, self.meta())
    }

    /// Readings of one taxel across all frames.
    pub fn taxel_series(&self, taxel: usize) -> Vec<u16> {
        self.frames.iter().map(|f| f.readings[taxel]).collect()
    }
}
