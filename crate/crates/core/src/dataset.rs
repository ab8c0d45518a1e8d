use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::gesture::GestureClass;
use crate::recording::GestureRecording;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

/// Per-class sample counts, indexed by [`GestureClass::code`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts(pub [usize; GestureClass::COUNT]);

impl ClassCounts {
    pub fn get(&self, class: GestureClass) -> usize {
        self.0[class.code()]
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

/// A collection of recordings plus the participant → split assignment.
///
/// The assignment is either empty (not yet split) or covers every
/// participant that appears in the recordings.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    recordings: Vec<GestureRecording>,
    split_assignment: BTreeMap<String, Split>,
}

impl Dataset {
    pub fn new(recordings: Vec<GestureRecording>) -> Self {
        Self { recordings, split_assignment: BTreeMap::new() }
    }

    pub fn with_assignment(
        recordings: Vec<GestureRecording>,
        split_assignment: BTreeMap<String, Split>,
    ) -> Result<Self> {
        let ds = Self { recordings, split_assignment };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.split_assignment.is_empty() {
            return Ok(());
        }
        for (i, r) in self.recordings.iter().enumerate() {
            if !self.split_assignment.contains_key(r.participant_id()) {
                return Err(CoreError::InvalidDataset(format!(
                    "recording {i}: participant '{}' has no split assignment",
                    r.participant_id()
                )));
            }
        }
        Ok(())
    }

    pub fn recordings(&self) -> &[GestureRecording] {
        &self.recordings
    }

    pub fn into_recordings(self) -> Vec<GestureRecording> {
        self.recordings
    }

    pub fn split_assignment(&self) -> &BTreeMap<String, Split> {
        &self.split_assignment
    }

    pub fn is_split(&self) -> bool {
        !self.split_assignment.is_empty()
    }

    pub fn len(&self) -> usize {
        self.recordings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recordings.is_empty()
    }

    /// Distinct participant ids in sorted order.
    pub fn participants(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.recordings.iter().map(|r| r.participant_id()).collect();
        set.into_iter().map(str::to_owned).collect()
    }

    pub fn split_of(&self, participant: &str) -> Option<Split> {
        self.split_assignment.get(participant).copied()
    }

    /// Recordings whose participant belongs to `split`.
    pub fn subset(&self, split: Split) -> Vec<&GestureRecording> {
        self.recordings
            .iter()
            .filter(|r| self.split_of(r.participant_id()) == Some(split))
            .collect()
    }

    pub fn participants_in(&self, split: Split) -> Vec<String> {
        self.split_assignment.iter().filter(|(_, &s)| s == split).map(|(p, _)| p.clone()).collect()
    }

    pub fn class_counts(&self, split: Split) -> ClassCounts {
        let mut counts = ClassCounts::default();
        for r in self.subset(split) {
            if let Some(label) = r.label() {
                counts.0[label.code()] += 1;
            }
        }
        counts
    }

    /// Assigns whole participants to train or test.
    ///
    /// Participants are sorted, shuffled by `seed`, and the first
    /// `train_participants` go to train, the next `test_participants` to
    /// test. Recordings of any remaining participants are dropped. The
    /// assignment depends only on the participant set and the seed.
    pub fn split_by_participant(
        &self,
        train_participants: usize,
        test_participants: usize,
        seed: u64,
    ) -> Result<Dataset> {
        let mut participants = self.participants();
        let needed = train_participants + test_participants;
        if train_participants == 0 || test_participants == 0 {
            return Err(CoreError::Config("both splits need at least one participant".into()));
        }
        if needed > participants.len() {
            return Err(CoreError::Config(format!(
                "need {needed} participants ({train_participants} train + {test_participants} test), dataset has {}",
                participants.len()
            )));
        }
        participants.shuffle(&mut seed::rng(seed));
        let assignment: BTreeMap<String, Split> = participants
            .into_iter()
            .take(needed)
            .enumerate()
            .map(|(i, p)| (p, if i < train_participants { Split::Train } else { Split::Test }))
            .collect();
        let recordings = self
            .recordings
            .iter()
            .filter(|r| assignment.contains_key(r.participant_id()))
            .cloned()
            .collect();
        Dataset::with_assignment(recordings, assignment)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::Section;
    use crate::recording::{RecordingMeta, TaxelFrame};

    pub(crate) fn recording(participant: &str, label: GestureClass, trial: u32) -> GestureRecording {
        GestureRecording::new(
            vec![TaxelFrame::zeros(0.0)],
            RecordingMeta {
                label: Some(label),
                participant_id: participant.into(),
                arm_section: Section::Upper,
                trial_index: trial,
                sample_rate_hz: 50.0,
            },
        )
        .unwrap()
    }

    fn dataset_with_trials(trials: impl Fn(&str) -> u32, participants: &[String]) -> Dataset {
        let mut recs = Vec::new();
        for p in participants {
            for c in GestureClass::ALL {
                for t in 0..trials(p) {
                    recs.push(recording(p, c, t));
                }
            }
        }
        Dataset::new(recs)
    }

    #[test]
    fn sixteen_participants_give_900_and_180() {
        let ids: Vec<String> = (1..=16).map(|i| format!("p{i:02}")).collect();
        // The assignment only depends on participant ids and the seed, so a
        // probe split tells us who will be a training participant.
        let probe = dataset_with_trials(|_| 1, &ids).split_by_participant(10, 6, 42).unwrap();
        let full = dataset_with_trials(
            |p| if probe.split_of(p) == Some(Split::Train) { 15 } else { 5 },
            &ids,
        );
        let split = full.split_by_participant(10, 6, 42).unwrap();
        assert_eq!(split.subset(Split::Train).len(), 900);
        assert_eq!(split.subset(Split::Test).len(), 180);
        for c in GestureClass::ALL {
            assert_eq!(split.class_counts(Split::Train).get(c), 150);
            assert_eq!(split.class_counts(Split::Test).get(c), 30);
        }
    }

    #[test]
    fn two_participants_land_on_opposite_sides() {
        let ids = vec!["a".to_string(), "b".to_string()];
        for seed in 0..20 {
            let ds = dataset_with_trials(|_| 2, &ids).split_by_participant(1, 1, seed).unwrap();
            let a = ds.split_of("a").unwrap();
            let b = ds.split_of("b").unwrap();
            assert_ne!(a, b);
            for r in ds.recordings() {
                assert_eq!(ds.split_of(r.participant_id()), Some(if r.participant_id() == "a" { a } else { b }));
            }
        }
    }

    #[test]
    fn split_is_deterministic() {
        let ids: Vec<String> = (0..9).map(|i| format!("p{i}")).collect();
        let ds = dataset_with_trials(|_| 1, &ids);
        let a = ds.split_by_participant(5, 3, 9).unwrap();
        let b = ds.split_by_participant(5, 3, 9).unwrap();
        assert_eq!(a, b);
        // one participant left over is dropped entirely
        assert_eq!(a.participants().len(), 8);
    }

    #[test]
    fn too_few_participants() {
        let ids: Vec<String> = (0..3).map(|i| format!("p{i}")).collect();
        let ds = dataset_with_trials(|_| 1, &ids);
        assert!(matches!(ds.split_by_participant(2, 2, 0), Err(CoreError::Config(_))));
    }

    #[test]
    fn assignment_must_cover_participants() {
        let recs = vec![recording("x", GestureClass::Hit, 0)];
        let mut map = BTreeMap::new();
        map.insert("y".to_string(), Split::Train);
        assert!(Dataset::with_assignment(recs, map).is_err());
    }
}
