//! Domain types for a two-section resistive taxel skin.
//!
//! The skin covers a robot arm with two knitted grids: a 7×5 upper-arm
//! section and a 7×4 lower-arm section, 63 taxels in total. Every frame is
//! stored as a flat 63-vector of 10-bit ADC counts (upper section first,
//! row-major within a section).
//!
//! This crate holds the shared vocabulary: [`GestureClass`], [`SensorLayout`],
//! [`TaxelFrame`], [`GestureRecording`] and [`Dataset`], together with
//! participant-wise splitting and the line-delimited JSON file format.

pub mod dataset;
pub mod error;
pub mod gesture;
pub mod io;
pub mod layout;
pub mod recording;
pub mod seed;
pub mod split;

pub use dataset::{ClassCounts, Dataset, Split};
pub use error::{CoreError, Result};
pub use gesture::GestureClass;
pub use layout::{Section, SectionGrid, SensorLayout, TAXEL_COUNT};
pub use recording::{GestureRecording, RecordingMeta, TaxelFrame, ADC_MAX};
pub use split::train_val_split;
