use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use taxel_core::{GestureClass, Section, SensorLayout};

use crate::error::{Result, SimError};

/// Closed interval sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub min: f64,
    pub max: f64,
}

impl Span {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.max > self.min {
            rng.random_range(self.min..=self.max)
        } else {
            self.min
        }
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }

    pub fn contains(&self, v: f64) -> bool {
        (self.min..=self.max).contains(&v)
    }

    fn check(&self, what: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min <= self.max) {
            return Err(SimError::Config(format!("{what}: invalid range [{}, {}]", self.min, self.max)));
        }
        Ok(())
    }
}

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountSpan {
    pub min: usize,
    pub max: usize,
}

impl CountSpan {
    pub const fn new(min: usize, max: usize) -> Self {
        Self { min, max }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        rng.random_range(self.min..=self.max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Motion {
    /// One press with a flat top.
    Static,
    /// A single short half-sine burst per repetition.
    Burst,
    /// Force oscillating between zero and the peak.
    Oscillating { frequency_hz: Span },
    /// A block of `rows` x 2 taxels sweeping back and forth across columns.
    Translating { columns_per_s: Span },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    /// Contact duration in seconds; per burst when `repetitions` exceeds one.
    pub duration_s: Span,
    /// Number of taxels under the contact.
    pub footprint: CountSpan,
    pub peak_force_n: Span,
    pub repetitions: CountSpan,
    /// Pause between repetitions.
    pub gap_s: Span,
    pub motion: Motion,
}

impl ClassParams {
    fn validate(&self, class: GestureClass, sat_force: f64, section_sizes: &[usize]) -> Result<()> {
        let name = class.name();
        self.duration_s.check(name)?;
        self.peak_force_n.check(name)?;
        self.gap_s.check(name)?;
        if self.duration_s.min <= 0.0 {
            return Err(SimError::Config(format!("{name}: durations must be positive")));
        }
        let smallest = section_sizes.iter().copied().min().unwrap_or(0);
        if self.footprint.min == 0 || self.footprint.min > self.footprint.max || self.footprint.max > smallest {
            return Err(SimError::Config(format!(
                "{name}: footprint [{}, {}] must lie in [1, {smallest}]",
                self.footprint.min, self.footprint.max
            )));
        }
        if self.peak_force_n.min < 0.0 || self.peak_force_n.max > 2.0 * sat_force {
            return Err(SimError::Config(format!("{name}: peak force must lie in [0, {}] N", 2.0 * sat_force)));
        }
        if self.repetitions.min == 0 || self.repetitions.min > self.repetitions.max {
            return Err(SimError::Config(format!("{name}: repetitions must be at least 1")));
        }
        if self.repetitions.max > 1 && self.gap_s.min <= 0.0 {
            return Err(SimError::Config(format!("{name}: repeated bursts need a positive gap")));
        }
        match self.motion {
            Motion::Oscillating { frequency_hz: f } | Motion::Translating { columns_per_s: f } => {
                f.check(name)?;
                if f.min <= 0.0 {
                    return Err(SimError::Config(format!("{name}: motion rate must be positive")));
                }
            }
            Motion::Static | Motion::Burst => {}
        }
        Ok(())
    }
}

/// Per-participant multiplicative style factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleParams {
    pub force_scale: Span,
    pub tempo_scale: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GestureParams {
    pub hit: ClassParams,
    pub poke: ClassParams,
    pub grab: ClassParams,
    pub rub: ClassParams,
    pub shake: ClassParams,
    pub tap: ClassParams,
    pub lead_in_s: Span,
    pub tail_s: Span,
    pub style: StyleParams,
}

impl Default for GestureParams {
    fn default() -> Self {
        let single = CountSpan::new(1, 1);
        let no_gap = Span::new(0.0, 0.0);
        Self {
            hit: ClassParams {
                duration_s: Span::new(0.15, 0.35),
                footprint: CountSpan::new(4, 9),
                peak_force_n: Span::new(8.0, 14.0),
                repetitions: single,
                gap_s: no_gap,
                motion: Motion::Burst,
            },
            poke: ClassParams {
                duration_s: Span::new(0.2, 0.45),
                footprint: CountSpan::new(1, 2),
                peak_force_n: Span::new(3.5, 6.0),
                repetitions: single,
                gap_s: no_gap,
                motion: Motion::Burst,
            },
            grab: ClassParams {
                duration_s: Span::new(1.5, 3.0),
                footprint: CountSpan::new(8, 16),
                peak_force_n: Span::new(5.0, 10.0),
                repetitions: single,
                gap_s: no_gap,
                motion: Motion::Static,
            },
            rub: ClassParams {
                duration_s: Span::new(4.4, 6.0),
                footprint: CountSpan::new(4, 6),
                peak_force_n: Span::new(3.0, 6.0),
                repetitions: single,
                gap_s: no_gap,
                motion: Motion::Translating { columns_per_s: Span::new(2.0, 4.0) },
            },
            shake: ClassParams {
                duration_s: Span::new(1.0, 3.0),
                footprint: CountSpan::new(6, 12),
                peak_force_n: Span::new(6.0, 10.0),
                repetitions: single,
                gap_s: no_gap,
                motion: Motion::Oscillating { frequency_hz: Span::new(3.0, 6.0) },
            },
            tap: ClassParams {
                duration_s: Span::new(0.1, 0.2),
                footprint: CountSpan::new(1, 4),
                peak_force_n: Span::new(3.0, 5.0),
                repetitions: CountSpan::new(2, 5),
                gap_s: Span::new(0.1, 0.3),
                motion: Motion::Burst,
            },
            lead_in_s: Span::new(0.2, 0.6),
            tail_s: Span::new(0.2, 0.5),
            style: StyleParams { force_scale: Span::new(0.8, 1.2), tempo_scale: Span::new(0.85, 1.15) },
        }
    }
}

impl GestureParams {
    pub fn class(&self, class: GestureClass) -> &ClassParams {
        match class {
            GestureClass::Hit => &self.hit,
            GestureClass::Poke => &self.poke,
            GestureClass::Grab => &self.grab,
            GestureClass::Rub => &self.rub,
            GestureClass::Shake => &self.shake,
            GestureClass::Tap => &self.tap,
        }
    }

    pub fn validate(&self, sat_force: f64, layout: &SensorLayout) -> Result<()> {
        let sizes: Vec<usize> = Section::ALL.iter().filter_map(|&s| layout.grid(s)).map(|g| g.len()).collect();
        for class in GestureClass::ALL {
            self.class(class).validate(class, sat_force, &sizes)?;
        }
        self.lead_in_s.check("lead-in")?;
        self.tail_s.check("tail")?;
        self.style.force_scale.check("force scale")?;
        self.style.tempo_scale.check("tempo scale")?;
        if self.lead_in_s.min < 0.0 || self.tail_s.min < 0.0 || self.style.force_scale.min <= 0.0 || self.style.tempo_scale.min <= 0.0 {
            return Err(SimError::Config("lead-in, tail and style factors must be non-negative".into()));
        }
        Ok(())
    }
}

/// Distribution of per-taxel physical parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SkinParams {
    pub upper_min_force_n: f64,
    pub lower_min_force_n: f64,
    /// Relative half-width of the uniform jitter on min_force.
    pub min_force_jitter: f64,
    pub sat_force_n: f64,
    /// Counts per N^nonlinearity above min_force.
    pub gain: f64,
    pub gain_jitter: f64,
    pub nonlinearity: f64,
    /// Reading at exactly min_force, before noise.
    pub contact_onset: f64,
    pub noise_std: f64,
}

impl Default for SkinParams {
    fn default() -> Self {
        Self {
            upper_min_force_n: 1.15,
            lower_min_force_n: 1.975,
            min_force_jitter: 0.2,
            sat_force_n: 13.95,
            gain: 90.0,
            gain_jitter: 0.3,
            nonlinearity: 0.8,
            contact_onset: 12.0,
            noise_std: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub skin: SkinParams,
    pub gestures: GestureParams,
    pub n_train_participants: usize,
    pub n_test_participants: usize,
    /// Trials per gesture for a training participant: [upper arm, lower arm].
    pub train_trials: [usize; 2],
    pub test_trials: [usize; 2],
    pub sample_rate_hz: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            skin: SkinParams::default(),
            gestures: GestureParams::default(),
            n_train_participants: 10,
            n_test_participants: 6,
            train_trials: [9, 6],
            test_trials: [3, 2],
            sample_rate_hz: 50.0,
        }
    }
}

impl SynthConfig {
    pub fn noise_free(mut self) -> Self {
        self.skin.noise_std = 0.0;
        self
    }

    pub fn validate(&self, layout: &SensorLayout) -> Result<()> {
        let s = &self.skin;
        let hi_jitter = 1.0 + s.min_force_jitter;
        if !(s.upper_min_force_n > 0.0 && s.lower_min_force_n > 0.0) {
            return Err(SimError::Config("min_force must be positive".into()));
        }
        if !(0.0..1.0).contains(&s.min_force_jitter) || !(0.0..1.0).contains(&s.gain_jitter) {
            return Err(SimError::Config("jitter fractions must lie in [0, 1)".into()));
        }
        if s.upper_min_force_n.max(s.lower_min_force_n) * hi_jitter >= s.sat_force_n {
            return Err(SimError::Config("min_force must stay below sat_force".into()));
        }
        if !(s.gain > 0.0 && s.nonlinearity > 0.0 && s.noise_std >= 0.0 && s.contact_onset >= 0.0) {
            return Err(SimError::Config("gain and nonlinearity must be positive, noise and onset non-negative".into()));
        }
        if self.n_train_participants + self.n_test_participants == 0 {
            return Err(SimError::Config("at least one participant is required".into()));
        }
        if self.train_trials.iter().sum::<usize>() == 0 && self.test_trials.iter().sum::<usize>() == 0 {
            return Err(SimError::Config("at least one trial per gesture is required".into()));
        }
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return Err(SimError::Config("sample rate must be positive".into()));
        }
        self.gestures.validate(s.sat_force_n, layout)
    }

    /// Reads a JSON file; absent fields keep their defaults.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| SimError::Io { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|source| SimError::Json { path: path.into(), source })
    }
}
