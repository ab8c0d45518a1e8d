//! Simulated resistive skin: per-taxel force response, a six-gesture
//! synthesizer, the synthetic study builder and an indentation bench.

pub mod characterize;
pub mod dataset;
pub mod error;
pub mod gesture;
pub mod params;
pub mod taxel;

pub use characterize::{run_characterization, CharacterizationReport, CurveSample, IndentationProtocol, Stat};
pub use dataset::{participant_id, synthesize_dataset};
pub use error::{Result, SimError};
pub use gesture::{skin_seed, synthesize_gesture, GesturePlan, Shape, Style, Sweep, Synthesizer};
pub use params::{ClassParams, CountSpan, GestureParams, Motion, SkinParams, Span, StyleParams, SynthConfig};
pub use taxel::{SkinModel, TaxelModel};
