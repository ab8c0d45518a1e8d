//! Indentation test bench: a probe presses a taxel while a force sensor
//! records ground truth.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use taxel_core::{seed, Section, SensorLayout};

use crate::error::{Result, SimError};
use crate::taxel::SkinModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndentationProtocol {
    pub start_height_mm: f64,
    pub approach_speed_mm_s: f64,
    pub press_depth_mm: f64,
    pub repetitions: usize,
    pub taxels: Vec<usize>,
    /// Linear surface stiffness converting indentation to force.
    pub stiffness_n_per_mm: f64,
    pub sensor_rate_hz: f64,
    /// Standard deviation of the ground-truth force sensor.
    pub force_noise_n: f64,
    pub activation_threshold: u16,
    pub plateau_fraction: f64,
    /// Keep every n-th contact sample in the exported curve.
    pub curve_decimation: usize,
}

impl Default for IndentationProtocol {
    fn default() -> Self {
        Self {
            start_height_mm: 60.0,
            approach_speed_mm_s: 17.0,
            press_depth_mm: 4.0,
            repetitions: 10,
            taxels: vec![6, 13, 22, 29, 40, 45, 52, 58],
            stiffness_n_per_mm: 3.5,
            sensor_rate_hz: 10_000.0,
            force_noise_n: 0.05,
            activation_threshold: 10,
            plateau_fraction: 0.99,
            curve_decimation: 10,
        }
    }
}

impl IndentationProtocol {
    pub fn validate(&self, layout: &SensorLayout) -> Result<()> {
        let positive = [self.start_height_mm, self.approach_speed_mm_s, self.press_depth_mm, self.sensor_rate_hz];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) || self.repetitions == 0 || self.taxels.is_empty() {
            return Err(SimError::Config("heights, speed, depth, rate, repetitions and taxels must be positive".into()));
        }
        if !(self.stiffness_n_per_mm >= 0.0 && self.force_noise_n >= 0.0) {
            return Err(SimError::Config("stiffness and force noise must be non-negative".into()));
        }
        if !(self.plateau_fraction > 0.0 && self.plateau_fraction <= 1.0) || self.curve_decimation == 0 {
            return Err(SimError::Config("plateau fraction must lie in (0, 1] and decimation be positive".into()));
        }
        if let Some(&bad) = self.taxels.iter().find(|&&t| t >= layout.taxel_count()) {
            return Err(SimError::NoSuchTaxel { index: bad, count: layout.taxel_count() });
        }
        Ok(())
    }

    /// Probe position relative to the surface (negative = indenting) at time `t`.
    pub fn probe_height(&self, t: f64) -> f64 {
        let down = (self.start_height_mm + self.press_depth_mm) / self.approach_speed_mm_s;
        if t <= down {
            self.start_height_mm - self.approach_speed_mm_s * t
        } else {
            -self.press_depth_mm + self.approach_speed_mm_s * (t - down)
        }
    }

    pub fn duration(&self) -> f64 {
        2.0 * (self.start_height_mm + self.press_depth_mm) / self.approach_speed_mm_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub taxel: usize,
    pub repetition: usize,
    pub force: f64,
    pub reading: u16,
}

/// Mean and sample standard deviation over the repetitions that reached
/// the event; `None` when none did.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub reached: usize,
    pub repetitions: usize,
}

impl Stat {
    pub fn of(values: &[Option<f64>]) -> Self {
        let xs: Vec<f64> = values.iter().flatten().copied().collect();
        let n = xs.len();
        let mean = (n > 0).then(|| xs.iter().sum::<f64>() / n as f64);
        let std = mean.filter(|_| n > 1).map(|m| (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt());
        Self { mean, std, reached: n, repetitions: values.len() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxelCharacterization {
    pub taxel: usize,
    pub section: Section,
    pub configured_min_force: f64,
    pub configured_sat_force: f64,
    pub min_detect: Vec<Option<f64>>,
    pub max_sat: Vec<Option<f64>>,
    pub min_detect_stat: Stat,
    pub max_sat_stat: Stat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionRange {
    pub section: Section,
    pub min_detect: Stat,
    pub max_sat: Stat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterizationReport {
    pub protocol: IndentationProtocol,
    pub taxels: Vec<TaxelCharacterization>,
    pub sections: Vec<SectionRange>,
    #[serde(skip)]
    pub curve: Vec<CurveSample>,
}

impl CharacterizationReport {
    pub fn write_curve_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for s in &self.curve {
            w.serialize(s)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render(&self) -> String {
        let fmt = |s: &Stat| match (s.mean, s.std) {
            (Some(m), Some(sd)) => format!("{m:6.3} ± {sd:5.3} N"),
            (Some(m), None) => format!("{m:6.3} N"),
            _ => "not reached".to_string(),
        };
        let mut out = String::from("taxel section   min detect          max saturation\n");
        for t in &self.taxels {
            out += &format!(
                "{:>5} {:<7} {:<19} {}\n",
                t.taxel,
                t.section.name(),
                fmt(&t.min_detect_stat),
                fmt(&t.max_sat_stat)
            );
        }
        for s in &self.sections {
            out += &format!("{:<13} {:<19} {}\n", s.section.name(), fmt(&s.min_detect), fmt(&s.max_sat));
        }
        out
    }
}

struct Repetition {
    min_detect: Option<f64>,
    max_sat: Option<f64>,
    curve: Vec<(f64, u16)>,
}

fn press<R: Rng>(skin: &SkinModel, taxel: usize, p: &IndentationProtocol, rng: &mut R) -> Repetition {
    let model = &skin.taxels[taxel];
    let dt = 1.0 / p.sensor_rate_hz;
    let n = (p.duration() / dt).floor() as usize;
    let mut samples = Vec::new();
    for k in 0..=n {
        let depth = -p.probe_height(k as f64 * dt);
        if depth <= 0.0 {
            continue;
        }
        let force = p.stiffness_n_per_mm * depth;
        let reading = model.reading_from_force(force, rng);
        let noise: f64 = if p.force_noise_n > 0.0 { rng.sample::<f64, _>(StandardNormal) * p.force_noise_n } else { 0.0 };
        samples.push((force + noise, reading));
    }
    let first = samples.iter().position(|s| s.1 > p.activation_threshold);
    let min_detect = first.map(|i| samples[i].0);
    let max_sat = first.and_then(|_| {
        let plateau = samples.iter().map(|s| s.1).max()? as f64;
        samples.iter().find(|s| s.1 as f64 >= p.plateau_fraction * plateau).map(|s| s.0)
    });
    let curve = samples.into_iter().step_by(p.curve_decimation).collect();
    Repetition { min_detect, max_sat, curve }
}

/// Presses each protocol taxel `repetitions` times and extracts the lowest
/// detectable force and the force at which the reading saturates.
pub fn run_characterization(
    layout: &SensorLayout,
    skin: &SkinModel,
    protocol: &IndentationProtocol,
    seed: u64,
) -> Result<CharacterizationReport> {
    protocol.validate(layout)?;
    let mut taxels = Vec::new();
    let mut curve = Vec::new();
    for &taxel in &protocol.taxels {
        let model = skin.taxel(taxel)?;
        let (section, _, _) = layout.locate(taxel).expect("validated index");
        let mut min_detect = Vec::new();
        let mut max_sat = Vec::new();
        for rep in 0..protocol.repetitions {
            let mut rng = seed::rng(seed::derive(seed, &[taxel as u64, rep as u64]));
            let r = press(skin, taxel, protocol, &mut rng);
            min_detect.push(r.min_detect);
            max_sat.push(r.max_sat);
            curve.extend(r.curve.into_iter().map(|(force, reading)| CurveSample { taxel, repetition: rep, force, reading }));
        }
        taxels.push(TaxelCharacterization {
            taxel,
            section,
            configured_min_force: model.min_force,
            configured_sat_force: model.sat_force,
            min_detect_stat: Stat::of(&min_detect),
            max_sat_stat: Stat::of(&max_sat),
            min_detect,
            max_sat,
        });
    }
    let sections = Section::ALL
        .iter()
        .filter(|&&s| taxels.iter().any(|t| t.section == s))
        .map(|&section| {
            let of = |pick: fn(&TaxelCharacterization) -> &Vec<Option<f64>>| {
                let all: Vec<Option<f64>> =
                    taxels.iter().filter(|t| t.section == section).flat_map(|t| pick(t).iter().copied()).collect();
                Stat::of(&all)
            };
            SectionRange { section, min_detect: of(|t| &t.min_detect), max_sat: of(|t| &t.max_sat) }
        })
        .collect();
    Ok(CharacterizationReport { protocol: protocol.clone(), taxels, sections, curve })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_reaches_press_depth() {
        let p = IndentationProtocol::default();
        assert_eq!(p.probe_height(0.0), 60.0);
        let bottom = 64.0 / 17.0;
        assert!((p.probe_height(bottom) + 4.0).abs() < 1e-9);
        assert!((p.probe_height(p.duration()) - 60.0).abs() < 1e-9);
    }

    #[test]
    fn stat_of_unreached_is_empty() {
        let s = Stat::of(&[None, None]);
        assert_eq!((s.mean, s.std, s.reached), (None, None, 0));
        let s = Stat::of(&[Some(1.0), Some(3.0), None]);
        assert_eq!(s.mean, Some(2.0));
        assert!((s.std.unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn invalid_taxel_rejected() {
        let p = IndentationProtocol { taxels: vec![3, 63], ..Default::default() };
        assert!(matches!(p.validate(&SensorLayout::skin()), Err(SimError::NoSuchTaxel { index: 63, .. })));
    }
}
