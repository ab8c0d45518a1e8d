use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use taxel_core::TAXEL_COUNT;

use crate::config::PipelineConfig;
use crate::error::{PipelineError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    /// Number of activated taxels in each frame (the main feature).
    ActivatedCount,
    /// Smoothed readings of the taxel with the highest mean.
    MaxTaxelTrace,
    /// Per-taxel frequency of the strongest non-DC spectral bin.
    PrincipalFrequency,
    TaxelMean,
    TaxelStd,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 5] = [
        FeatureKind::ActivatedCount,
        FeatureKind::MaxTaxelTrace,
        FeatureKind::PrincipalFrequency,
        FeatureKind::TaxelMean,
        FeatureKind::TaxelStd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::ActivatedCount => "activated-count",
            FeatureKind::MaxTaxelTrace => "max-taxel-trace",
            FeatureKind::PrincipalFrequency => "principal-frequency",
            FeatureKind::TaxelMean => "taxel-mean",
            FeatureKind::TaxelStd => "taxel-std",
        }
    }

    /// Short label used in ablation tables: `Ours`, then `F1`..`F4`.
    pub fn short_label(self) -> &'static str {
        match self {
            FeatureKind::ActivatedCount => "Ours",
            FeatureKind::MaxTaxelTrace => "F1",
            FeatureKind::PrincipalFrequency => "F2",
            FeatureKind::TaxelMean => "F3",
            FeatureKind::TaxelStd => "F4",
        }
    }

    /// Whether the vector is a time series (one value per frame).
    pub fn is_sequence(self) -> bool {
        matches!(self, FeatureKind::ActivatedCount | FeatureKind::MaxTaxelTrace)
    }

    pub fn len(self, config: &PipelineConfig) -> usize {
        if self.is_sequence() {
            config.target_frames
        } else {
            TAXEL_COUNT
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s || k.short_label().eq_ignore_ascii_case(&s))
            .ok_or_else(|| format!("unknown feature kind '{s}'"))
    }
}

/// A fixed-length feature vector tagged with the extractor that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    kind: FeatureKind,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(kind: FeatureKind, values: Vec<f64>, config: &PipelineConfig) -> Result<Self> {
        let expected = kind.len(config);
        if values.len() != expected {
            return Err(PipelineError::Length { kind, expected, got: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(PipelineError::NonFinite { kind, index });
        }
        Ok(Self { kind, values })
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}
