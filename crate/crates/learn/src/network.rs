use serde::{Deserialize, Serialize};

use crate::adam::{adam_step, AdamConfig, AdamState};
use crate::error::Result;
use crate::layers::{Cache, Layer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sequential {
    pub layers: Vec<Layer>,
}

/// Gradient buffers shaped like a network's parameters: `[layer][tensor][i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads(pub Vec<Vec<Vec<f64>>>);

impl Grads {
    pub fn zeros_like(net: &Sequential) -> Self {
        Self(net.layers.iter().map(|l| l.params().iter().map(|p| vec![0.0; p.len()]).collect()).collect())
    }

    pub fn zero(&mut self) {
        self.0.iter_mut().flatten().for_each(|g| g.iter_mut().for_each(|v| *v = 0.0));
    }

    pub fn scale(&mut self, factor: f64) {
        self.0.iter_mut().flatten().for_each(|g| g.iter_mut().for_each(|v| *v *= factor));
    }

    /// All gradient values in parameter order.
    pub fn flatten(&self) -> Vec<f64> {
        self.0.iter().flatten().flatten().copied().collect()
    }
}

impl Sequential {
    pub fn new(layers: Vec<Layer>) -> Self {
        Self { layers }
    }

    pub fn forward(&self, x: &[f64]) -> (Vec<f64>, Vec<Cache>) {
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut act = x.to_vec();
        for layer in &self.layers {
            let (y, cache) = layer.forward(&act);
            caches.push(cache);
            act = y;
        }
        (act, caches)
    }

    pub fn infer(&self, x: &[f64]) -> Vec<f64> {
        self.layers.iter().fold(x.to_vec(), |act, layer| layer.infer(&act))
    }

    pub fn backward(&self, caches: &[Cache], gy: &[f64], grads: &mut Grads) -> Vec<f64> {
        let mut g = gy.to_vec();
        for ((layer, cache), lg) in self.layers.iter().zip(caches).zip(grads.0.iter_mut()).rev() {
            g = layer.backward(cache, &g, lg);
        }
        g
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().flat_map(|l| l.params()).map(|p| p.len()).sum()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.params()).flatten().copied().collect()
    }

    /// Mutable access to the scalar parameter at flat position `index`.
    pub fn param_at(&mut self, mut index: usize) -> Option<&mut f64> {
        for layer in &mut self.layers {
            for p in layer.params_mut() {
                if index < p.len() {
                    return Some(&mut p[index]);
                }
                index -= p.len();
            }
        }
        None
    }
}

/// Adam state for every parameter tensor of a network.
#[derive(Debug, Clone)]
pub struct Optimizer {
    pub config: AdamConfig,
    states: Vec<Vec<AdamState>>,
}

impl Optimizer {
    pub fn new(net: &Sequential, config: AdamConfig) -> Self {
        let states = net.layers.iter().map(|l| l.params().iter().map(|p| AdamState::new(p.len())).collect()).collect();
        Self { config, states }
    }

    pub fn step(&mut self, net: &mut Sequential, grads: &Grads) -> Result<()> {
        for ((layer, states), lg) in net.layers.iter_mut().zip(&mut self.states).zip(&grads.0) {
            for ((p, s), g) in layer.params_mut().into_iter().zip(states).zip(lg) {
                adam_step(p, g, s, &self.config)?;
            }
        }
        Ok(())
    }
}
