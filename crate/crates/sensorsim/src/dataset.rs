use std::collections::BTreeMap;

use taxel_core::{seed, Dataset, GestureClass, Section, SensorLayout, Split};

use crate::error::Result;
use crate::gesture::{skin_seed, Synthesizer};
use crate::params::SynthConfig;

const STREAM_STYLE: u64 = 0x5354_594c;
const STREAM_TRIAL: u64 = 0x5452_4941;

pub fn participant_id(index: usize) -> String {
    format!("P{index:02}")
}

/// Builds the full synthetic study. Participants `P00..` up to
/// `n_train_participants` form the training split, the rest the test split.
/// All participants share one simulated skin.
pub fn synthesize_dataset(layout: &SensorLayout, config: &SynthConfig, seed: u64) -> Result<Dataset> {
    let synth = Synthesizer::new(layout.clone(), config.clone(), skin_seed(seed))?;
    let total = config.n_train_participants + config.n_test_participants;
    let mut recordings = Vec::new();
    let mut assignment = BTreeMap::new();
    for p in 0..total {
        let id = participant_id(p);
        let (split, trials) = if p < config.n_train_participants {
            (Split::Train, config.train_trials)
        } else {
            (Split::Test, config.test_trials)
        };
        assignment.insert(id.clone(), split);
        let style = synth.sample_style(&mut seed::rng(seed::derive(seed, &[STREAM_STYLE, p as u64])));
        for class in GestureClass::ALL {
            let sections = Section::ALL.iter().zip(trials).flat_map(|(&s, n)| std::iter::repeat_n(s, n));
            for (trial, section) in sections.enumerate() {
                let trial_seed = seed::derive(seed, &[STREAM_TRIAL, p as u64, class.code() as u64, trial as u64]);
                let (rec, _) = synth.gesture(class, section, style, &id, trial as u32, trial_seed)?;
                recordings.push(rec);
            }
        }
    }
    Ok(Dataset::with_assignment(recordings, assignment)?)
}
