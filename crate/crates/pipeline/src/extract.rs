use taxel_core::{GestureClass, GestureRecording, TAXEL_COUNT};

use crate::config::PipelineConfig;
use crate::error::{PipelineError, Result};
use crate::feature::{FeatureKind, FeatureVector};
use crate::preprocess::{fix_length, smooth_taxel, trim_precontact};
use crate::spectrum::principal_frequency;

fn normalized_frames(recording: &GestureRecording, config: &PipelineConfig) -> Result<Vec<taxel_core::TaxelFrame>> {
    let trimmed = trim_precontact(recording, config)?;
    fix_length(trimmed.frames(), config.target_frames, config.sample_rate_hz)
}

/// Per-taxel series used by the four ablation features: `TAXEL_COUNT` rows of
/// `target_frames` values each.
///
/// The recording is trimmed and clipped to the target length, each taxel is
/// smoothed over the recorded frames only, and the remainder is zero padded,
/// so padding never bleeds into the smoothed readings.
pub fn prepare_taxel_series(recording: &GestureRecording, config: &PipelineConfig) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    let trimmed = trim_precontact(recording, config)?;
    let real = trimmed.len().min(config.target_frames);
    let frames = &trimmed.frames()[..real];
    Ok((0..TAXEL_COUNT)
        .map(|taxel| {
            let raw: Vec<f64> = frames.iter().map(|f| f64::from(f.readings()[taxel])).collect();
            let mut series = smooth_taxel(&raw, config.smoothing_window);
            series.resize(config.target_frames, 0.0);
            series
        })
        .collect())
}

/// Number of activated taxels per frame over the normalized frame window.
pub fn feature_activated_count(recording: &GestureRecording, config: &PipelineConfig) -> Result<FeatureVector> {
    config.validate()?;
    let values = normalized_frames(recording, config)?
        .iter()
        .map(|f| f.activated_count(config.activation_threshold) as f64)
        .collect();
    FeatureVector::new(FeatureKind::ActivatedCount, values, config)
}

/// Index of the taxel with the highest mean raw reading over the normalized
/// window; ties go to the lowest index.
pub fn max_mean_taxel(recording: &GestureRecording, config: &PipelineConfig) -> Result<usize> {
    let frames = normalized_frames(recording, config)?;
    let mut sums = [0u64; TAXEL_COUNT];
    for f in &frames {
        for (s, &v) in sums.iter_mut().zip(f.readings()) {
            *s += u64::from(v);
        }
    }
    let mut best = 0;
    for (i, &s) in sums.iter().enumerate() {
        if s > sums[best] {
            best = i;
        }
    }
    Ok(best)
}

pub fn feature_max_taxel_trace(recording: &GestureRecording, config: &PipelineConfig) -> Result<FeatureVector> {
    let taxel = max_mean_taxel(recording, config)?;
    let mut series = prepare_taxel_series(recording, config)?;
    FeatureVector::new(FeatureKind::MaxTaxelTrace, series.swap_remove(taxel), config)
}

pub fn feature_principal_frequency(recording: &GestureRecording, config: &PipelineConfig) -> Result<FeatureVector> {
    let values = prepare_taxel_series(recording, config)?
        .iter()
        .map(|s| principal_frequency(s, config.sample_rate_hz))
        .collect();
    FeatureVector::new(FeatureKind::PrincipalFrequency, values, config)
}

/// Population mean and standard deviation (divisor `n`).
pub fn mean_std(series: &[f64]) -> (f64, f64) {
    if series.is_empty() {
        return (0.0, 0.0);
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn feature_taxel_mean(recording: &GestureRecording, config: &PipelineConfig) -> Result<FeatureVector> {
    let values = prepare_taxel_series(recording, config)?.iter().map(|s| mean_std(s).0).collect();
    FeatureVector::new(FeatureKind::TaxelMean, values, config)
}

pub fn feature_taxel_std(recording: &GestureRecording, config: &PipelineConfig) -> Result<FeatureVector> {
    let values = prepare_taxel_series(recording, config)?.iter().map(|s| mean_std(s).1).collect();
    FeatureVector::new(FeatureKind::TaxelStd, values, config)
}

pub fn extract(kind: FeatureKind, recording: &GestureRecording, config: &PipelineConfig) -> Result<FeatureVector> {
    match kind {
        FeatureKind::ActivatedCount => feature_activated_count(recording, config),
        FeatureKind::MaxTaxelTrace => feature_max_taxel_trace(recording, config),
        FeatureKind::PrincipalFrequency => feature_principal_frequency(recording, config),
        FeatureKind::TaxelMean => feature_taxel_mean(recording, config),
        FeatureKind::TaxelStd => feature_taxel_std(recording, config),
    }
}

/// Features for a batch of labelled recordings. Recordings without contact
/// are skipped and counted in `dropped`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedSet {
    pub kind: FeatureKind,
    pub vectors: Vec<FeatureVector>,
    pub labels: Vec<Option<GestureClass>>,
    pub participants: Vec<String>,
    pub dropped: usize,
}

impl ExtractedSet {
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.vectors.iter().map(|v| v.values().to_vec()).collect()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

pub fn extract_all<'a, I>(kind: FeatureKind, recordings: I, config: &PipelineConfig) -> Result<ExtractedSet>
where
    I: IntoIterator<Item = &'a GestureRecording>,
{
    let mut set = ExtractedSet { kind, vectors: Vec::new(), labels: Vec::new(), participants: Vec::new(), dropped: 0 };
    for r in recordings {
        match extract(kind, r, config) {
            Ok(v) => {
                set.vectors.push(v);
                set.labels.push(r.label());
                set.participants.push(r.participant_id().to_owned());
            }
            Err(PipelineError::NoContact { .. }) => set.dropped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(set)
}
