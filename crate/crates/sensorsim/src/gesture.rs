use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};
use taxel_core::{
    seed, GestureClass, GestureRecording, RecordingMeta, Section, SensorLayout, TaxelFrame, TAXEL_COUNT,
};

use crate::error::{Result, SimError};
use crate::params::{Motion, Span, SynthConfig};
use crate::taxel::SkinModel;

const STREAM_PLAN: u64 = 0;
const STREAM_NOISE: u64 = 1;
const STREAM_SKIN: u64 = 0x534b_494e;

/// Longest ramp of a flat-topped press.
const MAX_RAMP_S: f64 = 0.1;
/// Per-taxel force share within a footprint.
const WEIGHTS: Span = Span::new(0.9, 1.0);

/// Participant style factors applied to force and tempo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Style {
    pub force_scale: f64,
    pub tempo_scale: f64,
}

impl Style {
    pub const NEUTRAL: Style = Style { force_scale: 1.0, tempo_scale: 1.0 };
}

/// Block of `rows` x `width` taxels sweeping across the columns of a section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub first_row: usize,
    pub rows: usize,
    pub width: usize,
    pub columns_per_s: f64,
}

/// Force envelope of each contact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// Linear ramps around a flat top.
    Press,
    HalfSine,
    /// `0.5 - 0.5·cos(2πft)`, starting and dipping to zero force.
    Oscillating { frequency_hz: f64 },
}

/// Every random choice behind one synthesized gesture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GesturePlan {
    pub class: GestureClass,
    pub section: Section,
    /// Flattened taxel indices in contact (static footprints only).
    pub footprint: Vec<usize>,
    /// Force share per footprint taxel, or per sweep-block cell.
    pub weights: Vec<f64>,
    pub peak_force: f64,
    /// `(start, duration)` of each contact relative to gesture onset, in s.
    pub bursts: Vec<(f64, f64)>,
    pub shape: Shape,
    pub sweep: Option<Sweep>,
    pub lead_in_s: f64,
    pub tail_s: f64,
}

impl GesturePlan {
    pub fn contact_end(&self) -> f64 {
        self.bursts.iter().map(|(s, d)| s + d).fold(0.0, f64::max)
    }

    pub fn total_duration(&self) -> f64 {
        self.lead_in_s + self.contact_end() + self.tail_s
    }

    /// Envelope in [0, 1] at time `t` after gesture onset.
    fn envelope(&self, t: f64) -> f64 {
        let Some(&(s, d)) = self.bursts.iter().find(|(s, d)| t >= *s && t <= s + d) else {
            return 0.0;
        };
        let u = t - s;
        match self.shape {
            Shape::Press => {
                let ramp = MAX_RAMP_S.min(d / 4.0);
                (u / ramp).min((d - u) / ramp).min(1.0)
            }
            Shape::HalfSine => (PI * u / d).sin(),
            Shape::Oscillating { frequency_hz } => 0.5 - 0.5 * (2.0 * PI * frequency_hz * u).cos(),
        }
    }

    /// Force on every taxel at time `t` after gesture onset.
    pub fn forces_at(&self, layout: &SensorLayout, t: f64) -> Vec<f64> {
        let mut forces = vec![0.0; TAXEL_COUNT];
        let env = self.envelope(t);
        if env <= 0.0 {
            return forces;
        }
        match &self.sweep {
            None => {
                for (&i, w) in self.footprint.iter().zip(&self.weights) {
                    forces[i] = self.peak_force * w * env;
                }
            }
            Some(sw) => {
                let grid = layout.grid(self.section).expect("section in layout");
                let span = (grid.cols - sw.width) as f64;
                let col = if span > 0.0 {
                    let pos = (sw.columns_per_s * (t - self.bursts[0].0) + span).rem_euclid(2.0 * span);
                    ((pos - span).abs().floor() as usize).min(grid.cols - sw.width)
                } else {
                    0
                };
                for r in 0..sw.rows {
                    for c in 0..sw.width {
                        let i = layout
                            .flatten_index(self.section, sw.first_row + r, col + c)
                            .expect("sweep inside section");
                        forces[i] = self.peak_force * self.weights[r * sw.width + c] * env;
                    }
                }
            }
        }
        forces
    }
}

/// Synthesizes gestures on one simulated skin.
#[derive(Debug, Clone)]
pub struct Synthesizer {
    layout: SensorLayout,
    config: SynthConfig,
    skin: SkinModel,
}

impl Synthesizer {
    pub fn new(layout: SensorLayout, config: SynthConfig, skin_seed: u64) -> Result<Self> {
        config.validate(&layout)?;
        let skin = SkinModel::sample(&layout, &config.skin, skin_seed)?;
        Ok(Self { layout, config, skin })
    }

    pub fn with_skin(layout: SensorLayout, config: SynthConfig, skin: SkinModel) -> Result<Self> {
        config.validate(&layout)?;
        if skin.taxels.len() != layout.taxel_count() {
            return Err(SimError::Config(format!(
                "skin has {} taxels, layout {}",
                skin.taxels.len(),
                layout.taxel_count()
            )));
        }
        Ok(Self { layout, config, skin })
    }

    pub fn skin(&self) -> &SkinModel {
        &self.skin
    }

    pub fn config(&self) -> &SynthConfig {
        &self.config
    }

    pub fn layout(&self) -> &SensorLayout {
        &self.layout
    }

    pub fn sample_style<R: Rng>(&self, rng: &mut R) -> Style {
        let s = &self.config.gestures.style;
        Style { force_scale: s.force_scale.sample(rng), tempo_scale: s.tempo_scale.sample(rng) }
    }

    pub fn plan<R: Rng>(&self, class: GestureClass, section: Section, style: Style, rng: &mut R) -> Result<GesturePlan> {
        let grid = *self
            .layout
            .grid(section)
            .ok_or_else(|| SimError::Config(format!("layout has no {section} section")))?;
        let range = self.layout.range(section).expect("section in layout");
        let p = self.config.gestures.class(class);
        let tempo = style.tempo_scale;
        let peak_force = p.peak_force_n.clamp(p.peak_force_n.sample(rng) * style.force_scale);
        let reps = p.repetitions.sample(rng);
        let mut bursts = Vec::with_capacity(reps);
        let mut t = 0.0;
        for k in 0..reps {
            if k > 0 {
                t += p.gap_s.clamp(p.gap_s.sample(rng) / tempo);
            }
            let d = p.duration_s.clamp(p.duration_s.sample(rng) / tempo);
            bursts.push((t, d));
            t += d;
        }
        let k = p.footprint.sample(rng);
        let (footprint, weights, sweep, shape) = match p.motion {
            Motion::Translating { columns_per_s } => {
                let width = grid.cols.min(2);
                let rows = (k / width).clamp(1, grid.rows);
                let first_row = rng.random_range(0..=grid.rows - rows);
                let speed = columns_per_s.clamp(columns_per_s.sample(rng) * tempo);
                let weights = (0..rows * width).map(|_| WEIGHTS.sample(rng)).collect();
                (Vec::new(), weights, Some(Sweep { first_row, rows, width, columns_per_s: speed }), Shape::Press)
            }
            motion => {
                let start = rng.random_range(0..=grid.len() - k);
                let footprint: Vec<usize> = (range.start + start..range.start + start + k).collect();
                let weights = footprint.iter().map(|_| WEIGHTS.sample(rng)).collect();
                let shape = match motion {
                    Motion::Oscillating { frequency_hz } => {
                        Shape::Oscillating { frequency_hz: frequency_hz.clamp(frequency_hz.sample(rng) * tempo) }
                    }
                    Motion::Burst => Shape::HalfSine,
                    _ => Shape::Press,
                };
                (footprint, weights, None, shape)
            }
        };
        let g = &self.config.gestures;
        Ok(GesturePlan {
            class,
            section,
            footprint,
            weights,
            peak_force,
            bursts,
            shape,
            sweep,
            lead_in_s: g.lead_in_s.sample(rng),
            tail_s: g.tail_s.sample(rng),
        })
    }

    /// Samples the plan at the frame rate. Taxels of the other section stay zero.
    pub fn render<R: Rng>(&self, plan: &GesturePlan, meta: RecordingMeta, rng: &mut R) -> Result<GestureRecording> {
        let rate = self.config.sample_rate_hz;
        let n_frames = (plan.total_duration() * rate).ceil() as usize + 1;
        let range = self.layout.range(plan.section).expect("section in layout");
        let mut frames = Vec::with_capacity(n_frames);
        for k in 0..n_frames {
            let t = k as f64 / rate;
            let forces = plan.forces_at(&self.layout, t - plan.lead_in_s);
            let mut readings = vec![0u16; TAXEL_COUNT];
            for i in range.clone() {
                readings[i] = self.skin.taxels[i].reading_from_force(forces[i], rng);
            }
            frames.push(TaxelFrame::new(t, readings)?);
        }
        Ok(GestureRecording::new(frames, meta)?)
    }

    /// One recording; the plan and the sensor noise use separate sub-seeds.
    pub fn gesture(
        &self,
        class: GestureClass,
        section: Section,
        style: Style,
        participant_id: &str,
        trial_index: u32,
        seed: u64,
    ) -> Result<(GestureRecording, GesturePlan)> {
        let plan = self.plan(class, section, style, &mut seed::rng(seed::derive(seed, &[STREAM_PLAN])))?;
        let meta = RecordingMeta {
            label: Some(class),
            participant_id: participant_id.to_string(),
            arm_section: section,
            trial_index,
            sample_rate_hz: self.config.sample_rate_hz,
        };
        let rec = self.render(&plan, meta, &mut seed::rng(seed::derive(seed, &[STREAM_NOISE])))?;
        Ok((rec, plan))
    }
}

/// Seed of the skin drawn for a dataset or gesture synthesized from `seed`.
pub fn skin_seed(seed: u64) -> u64 {
    seed::derive(seed, &[STREAM_SKIN])
}

/// A single gesture on a skin drawn from the same seed, with neutral style.
pub fn synthesize_gesture(
    class: GestureClass,
    layout: &SensorLayout,
    config: &SynthConfig,
    section: Section,
    seed: u64,
) -> Result<GestureRecording> {
    let synth = Synthesizer::new(layout.clone(), config.clone(), skin_seed(seed))?;
    Ok(synth.gesture(class, section, Style::NEUTRAL, "P00", 0, seed)?.0)
}
