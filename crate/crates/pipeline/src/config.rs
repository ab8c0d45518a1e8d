use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// A taxel is activated when its reading is strictly greater than this.
    pub activation_threshold: u16,
    /// Every recording is clipped or zero-padded to this many frames.
    pub target_frames: usize,
    /// Centered moving-average window for the per-taxel features (odd).
    pub smoothing_window: usize,
    pub sample_rate_hz: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { activation_threshold: 10, target_frames: 150, smoothing_window: 3, sample_rate_hz: 50.0 }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.target_frames == 0 {
            return Err(PipelineError::Config("target_frames must be at least 1".into()));
        }
        if self.smoothing_window == 0 || self.smoothing_window.is_multiple_of(2) {
            return Err(PipelineError::Config(format!(
                "smoothing_window must be odd and >= 1, got {}",
                self.smoothing_window
            )));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(PipelineError::Config(format!("sample_rate_hz must be positive, got {}", self.sample_rate_hz)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_validation() {
        let c = PipelineConfig::default();
        assert_eq!((c.activation_threshold, c.target_frames, c.smoothing_window), (10, 150, 3));
        assert!(c.validate().is_ok());
        assert!(PipelineConfig { smoothing_window: 2, ..c.clone() }.validate().is_err());
        assert!(PipelineConfig { target_frames: 0, ..c.clone() }.validate().is_err());
        assert!(PipelineConfig { sample_rate_hz: 0.0, ..c }.validate().is_err());
    }
}
