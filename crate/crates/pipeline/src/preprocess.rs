use taxel_core::{GestureRecording, TaxelFrame};

use crate::config::PipelineConfig;
use crate::error::{PipelineError, Result};

/// Drops every frame before the first one with an activated taxel.
pub fn trim_precontact(recording: &GestureRecording, config: &PipelineConfig) -> Result<GestureRecording> {
    let threshold = config.activation_threshold;
    let first = recording
        .frames()
        .iter()
        .position(|f| f.is_active(threshold))
        .ok_or(PipelineError::NoContact { threshold })?;
    if first == 0 {
        return Ok(recording.clone());
    }
    Ok(recording.with_frames(recording.frames()[first..].to_vec())?)
}

/// Centered moving average. Near the ends the window shrinks to the samples
/// that exist, so the output has the input's length.
pub fn smooth_taxel(series: &[f64], window: usize) -> Vec<f64> {
    assert!(window % 2 == 1, "smoothing window must be odd");
    let half = window / 2;
    let n = series.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            series[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Keeps the first `target` frames, or appends all-zero frames spaced at the
/// nominal sample period until `target` is reached.
pub fn fix_length(frames: &[TaxelFrame], target: usize, sample_rate_hz: f64) -> Result<Vec<TaxelFrame>> {
    let last = frames.last().ok_or(PipelineError::Empty)?;
    if frames.len() >= target {
        return Ok(frames[..target].to_vec());
    }
    let period = 1.0 / sample_rate_hz;
    let t0 = last.timestamp();
    let mut out = frames.to_vec();
    out.extend((1..=target - frames.len()).map(|k| TaxelFrame::zeros(t0 + k as f64 * period)));
    Ok(out)
}
