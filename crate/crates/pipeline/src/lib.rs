//! Preprocessing and feature extraction.
//!
//! Every extractor starts from a raw [`GestureRecording`](taxel_core::GestureRecording):
//! frames before the first contact are dropped, the remainder is clipped or
//! zero-padded to a fixed number of frames, and one [`FeatureVector`] is
//! produced. The main feature (activated taxels per frame) works on the raw
//! counts; the four per-taxel features smooth each taxel first.

pub mod config;
pub mod error;
pub mod export;
pub mod extract;
pub mod feature;
pub mod preprocess;
pub mod spectrum;

pub use config::PipelineConfig;
pub use error::{PipelineError, Result};
pub use extract::{
    extract, extract_all, feature_activated_count, feature_max_taxel_trace, feature_principal_frequency,
    feature_taxel_mean, feature_taxel_std, prepare_taxel_series, ExtractedSet,
};
pub use feature::{FeatureKind, FeatureVector};
pub use preprocess::{fix_length, smooth_taxel, trim_precontact};
