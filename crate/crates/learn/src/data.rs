use taxel_core::GestureClass;
use taxel_pipeline::{ExtractedSet, FeatureKind};

use crate::error::{LearnError, Result};

/// A feature matrix with one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFeatures {
    pub kind: FeatureKind,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<GestureClass>,
}

impl LabeledFeatures {
    pub fn new(kind: FeatureKind, rows: Vec<Vec<f64>>, labels: Vec<GestureClass>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(LearnError::Shape(format!("{} rows but {} labels", rows.len(), labels.len())));
        }
        if let Some(first) = rows.first() {
            if let Some(i) = rows.iter().position(|r| r.len() != first.len()) {
                return Err(LearnError::Shape(format!("row {i} has {} values, row 0 has {}", rows[i].len(), first.len())));
            }
        }
        Ok(Self { kind, rows, labels })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn class_codes(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.code()).collect()
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            kind: self.kind,
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

impl TryFrom<&ExtractedSet> for LabeledFeatures {
    type Error = LearnError;

    fn try_from(set: &ExtractedSet) -> Result<Self> {
        let labels = set
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| l.ok_or(LearnError::Core(taxel_core::CoreError::Unlabeled(i))))
            .collect::<Result<Vec<_>>>()?;
        LabeledFeatures::new(set.kind, set.rows(), labels)
    }
}
