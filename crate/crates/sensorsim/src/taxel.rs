use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use taxel_core::{seed, Section, SensorLayout, ADC_MAX};

use crate::error::{Result, SimError};
use crate::params::SkinParams;

/// Force-to-reading response of one taxel.
///
/// Below `min_force` only noise is read. From `min_force` on the mean reading
/// starts at `contact_onset` and rises as `gain·(f - min_force)^nonlinearity`
/// until `sat_force`, after which it stays on the plateau.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxelModel {
    pub min_force: f64,
    pub sat_force: f64,
    pub gain: f64,
    pub nonlinearity: f64,
    pub contact_onset: f64,
    pub noise_std: f64,
}

impl TaxelModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.min_force && self.min_force < self.sat_force) {
            return Err(SimError::Config(format!(
                "need 0 < min_force < sat_force, got {} and {}",
                self.min_force, self.sat_force
            )));
        }
        if !(self.gain > 0.0 && self.nonlinearity > 0.0 && self.noise_std >= 0.0 && self.contact_onset >= 0.0) {
            return Err(SimError::Config("gain/nonlinearity must be positive, noise/onset non-negative".into()));
        }
        Ok(())
    }

    pub fn plateau(&self) -> f64 {
        self.curve(self.sat_force)
    }

    fn curve(&self, force: f64) -> f64 {
        let f = force.min(self.sat_force);
        (self.contact_onset + self.gain * (f - self.min_force).powf(self.nonlinearity)).min(ADC_MAX as f64)
    }

    /// Noise-free reading before quantization.
    pub fn mean_reading(&self, force: f64) -> f64 {
        if force < self.min_force {
            0.0
        } else {
            self.curve(force)
        }
    }

    pub fn reading_from_force<R: Rng>(&self, force: f64, rng: &mut R) -> u16 {
        let mut v = self.mean_reading(force.max(0.0));
        if self.noise_std > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            v += self.noise_std * z;
        }
        v.round().clamp(0.0, ADC_MAX as f64) as u16
    }
}

/// One `TaxelModel` per taxel, in flattened index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkinModel {
    pub taxels: Vec<TaxelModel>,
}

impl SkinModel {
    /// Draws per-taxel parameters around the section means.
    pub fn sample(layout: &SensorLayout, params: &SkinParams, seed: u64) -> Result<Self> {
        let mut rng = seed::rng(seed);
        let mut taxels = Vec::with_capacity(layout.taxel_count());
        for grid in layout.sections() {
            let base = match grid.section {
                Section::Upper => params.upper_min_force_n,
                Section::Lower => params.lower_min_force_n,
            };
            for _ in 0..grid.len() {
                let min_jitter = rng.random_range(-1.0..=1.0) * params.min_force_jitter;
                let gain_jitter = rng.random_range(-1.0..=1.0) * params.gain_jitter;
                let model = TaxelModel {
                    min_force: base * (1.0 + min_jitter),
                    sat_force: params.sat_force_n,
                    gain: params.gain * (1.0 + gain_jitter),
                    nonlinearity: params.nonlinearity,
                    contact_onset: params.contact_onset,
                    noise_std: params.noise_std,
                };
                model.validate()?;
                taxels.push(model);
            }
        }
        Ok(Self { taxels })
    }

    pub fn taxel(&self, index: usize) -> Result<&TaxelModel> {
        self.taxels.get(index).ok_or(SimError::NoSuchTaxel { index, count: self.taxels.len() })
    }

    /// Highest `min_force` over all taxels.
    pub fn max_min_force(&self) -> f64 {
        self.taxels.iter().map(|t| t.min_force).fold(0.0, f64::max)
    }
}
