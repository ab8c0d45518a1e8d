//! Differentiable layers over flat per-sample buffers.
//!
//! Multi-channel signals are stored channel-major (`channel * len + t`);
//! sequences fed to the LSTM are time-major (`t * input_dim + i`). Layers
//! hold parameters only: `forward` returns the activations needed by
//! `backward`, and gradients accumulate into caller-owned buffers, so one
//! network can be evaluated from several threads.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Uniform in `[-1/√fan_in, 1/√fan_in]`.
fn init_uniform<R: Rng>(rng: &mut R, len: usize, fan_in: usize) -> Vec<f64> {
    let bound = 1.0 / (fan_in as f64).sqrt();
    (0..len).map(|_| rng.random_range(-bound..=bound)).collect()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub in_dim: usize,
    pub out_dim: usize,
    /// Row-major `out_dim × in_dim`.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn new<R: Rng>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        Self {
            in_dim,
            out_dim,
            weight: init_uniform(rng, in_dim * out_dim, in_dim),
            bias: init_uniform(rng, out_dim, in_dim),
        }
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.in_dim);
        self.weight
            .chunks_exact(self.in_dim)
            .zip(&self.bias)
            .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }

    fn backward(&self, x: &[f64], gy: &[f64], grads: &mut [Vec<f64>]) -> Vec<f64> {
        let (gw, rest) = grads.split_at_mut(1);
        let (gw, gb) = (&mut gw[0], &mut rest[0]);
        let mut gx = vec![0.0; self.in_dim];
        for (j, &g) in gy.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            gb[j] += g;
            let row = &self.weight[j * self.in_dim..(j + 1) * self.in_dim];
            let grow = &mut gw[j * self.in_dim..(j + 1) * self.in_dim];
            for i in 0..self.in_dim {
                grow[i] += g * x[i];
                gx[i] += g * row[i];
            }
        }
        gx
    }
}

/// Valid (unpadded) 1-D convolution with a flipped kernel, so a unit impulse
/// reproduces the kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conv1d {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    /// `out_channels × in_channels × kernel`.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Conv1d {
    pub fn new<R: Rng>(in_channels: usize, out_channels: usize, kernel: usize, rng: &mut R) -> Self {
        let fan_in = in_channels * kernel;
        Self {
            in_channels,
            out_channels,
            kernel,
            weight: init_uniform(rng, out_channels * fan_in, fan_in),
            bias: init_uniform(rng, out_channels, fan_in),
        }
    }

    pub fn output_len(&self, in_len: usize) -> usize {
        in_len + 1 - self.kernel
    }

    fn w(&self, o: usize, c: usize, k: usize) -> f64 {
        self.weight[(o * self.in_channels + c) * self.kernel + k]
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        let in_len = x.len() / self.in_channels;
        let out_len = self.output_len(in_len);
        let k_last = self.kernel - 1;
        let mut y = vec![0.0; self.out_channels * out_len];
        for o in 0..self.out_channels {
            let out = &mut y[o * out_len..(o + 1) * out_len];
            out.iter_mut().for_each(|v| *v = self.bias[o]);
            for c in 0..self.in_channels {
                let xc = &x[c * in_len..(c + 1) * in_len];
                for k in 0..self.kernel {
                    let w = self.w(o, c, k);
                    let shift = k_last - k;
                    for (t, v) in out.iter_mut().enumerate() {
                        *v += w * xc[t + shift];
                    }
                }
            }
        }
        y
    }

    fn backward(&self, x: &[f64], gy: &[f64], grads: &mut [Vec<f64>]) -> Vec<f64> {
        let in_len = x.len() / self.in_channels;
        let out_len = self.output_len(in_len);
        let k_last = self.kernel - 1;
        let (gw, rest) = grads.split_at_mut(1);
        let (gw, gb) = (&mut gw[0], &mut rest[0]);
        let mut gx = vec![0.0; x.len()];
        for o in 0..self.out_channels {
            let g = &gy[o * out_len..(o + 1) * out_len];
            gb[o] += g.iter().sum::<f64>();
            for c in 0..self.in_channels {
                let xc = &x[c * in_len..(c + 1) * in_len];
                let gxc = &mut gx[c * in_len..(c + 1) * in_len];
                for k in 0..self.kernel {
                    let widx = (o * self.in_channels + c) * self.kernel + k;
                    let w = self.weight[widx];
                    let shift = k_last - k;
                    let mut acc = 0.0;
                    for (t, &gt) in g.iter().enumerate() {
                        acc += gt * xc[t + shift];
                        gxc[t + shift] += w * gt;
                    }
                    gw[widx] += acc;
                }
            }
        }
        gx
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxPool1d {
    pub channels: usize,
    pub size: usize,
}

impl MaxPool1d {
    fn forward(&self, x: &[f64]) -> (Vec<f64>, Vec<usize>) {
        let in_len = x.len() / self.channels;
        let out_len = in_len / self.size;
        let mut y = Vec::with_capacity(self.channels * out_len);
        let mut arg = Vec::with_capacity(self.channels * out_len);
        for c in 0..self.channels {
            for t in 0..out_len {
                let start = c * in_len + t * self.size;
                let mut best = start;
                for i in start + 1..start + self.size {
                    if x[i] > x[best] {
                        best = i;
                    }
                }
                y.push(x[best]);
                arg.push(best);
            }
        }
        (y, arg)
    }
}

/// Single-layer LSTM returning the final hidden state. Gates are stacked
/// as input, forget, cell, output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lstm {
    pub input_dim: usize,
    pub hidden: usize,
    /// `4·hidden × (input_dim + hidden)`, acting on `[x_t; h_{t-1}]`.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LstmStep {
    xh: Vec<f64>,
    /// Activated gates i, f, g, o (each `hidden` long).
    gates: Vec<f64>,
    c_prev: Vec<f64>,
    tanh_c: Vec<f64>,
}

impl Lstm {
    pub fn new<R: Rng>(input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        let cols = input_dim + hidden;
        Self {
            input_dim,
            hidden,
            weight: init_uniform(rng, 4 * hidden * cols, hidden),
            bias: init_uniform(rng, 4 * hidden, hidden),
        }
    }

    fn forward(&self, x: &[f64]) -> (Vec<f64>, Vec<LstmStep>) {
        let h_dim = self.hidden;
        let cols = self.input_dim + h_dim;
        let steps = x.len() / self.input_dim;
        let mut h = vec![0.0; h_dim];
        let mut c = vec![0.0; h_dim];
        let mut cache = Vec::with_capacity(steps);
        for t in 0..steps {
            let mut xh = Vec::with_capacity(cols);
            xh.extend_from_slice(&x[t * self.input_dim..(t + 1) * self.input_dim]);
            xh.extend_from_slice(&h);
            let mut gates: Vec<f64> = self
                .weight
                .chunks_exact(cols)
                .zip(&self.bias)
                .map(|(row, b)| b + row.iter().zip(&xh).map(|(w, v)| w * v).sum::<f64>())
                .collect();
            for (j, z) in gates.iter_mut().enumerate() {
                *z = if j / h_dim == 2 { z.tanh() } else { sigmoid(*z) };
            }
            let c_prev = c.clone();
            let mut tanh_c = vec![0.0; h_dim];
            for j in 0..h_dim {
                let (i, f, g, o) = (gates[j], gates[h_dim + j], gates[2 * h_dim + j], gates[3 * h_dim + j]);
                c[j] = f * c_prev[j] + i * g;
                tanh_c[j] = c[j].tanh();
                h[j] = o * tanh_c[j];
            }
            cache.push(LstmStep { xh, gates, c_prev, tanh_c });
        }
        (h, cache)
    }

    fn backward(&self, cache: &[LstmStep], gy: &[f64], grads: &mut [Vec<f64>]) -> Vec<f64> {
        let h_dim = self.hidden;
        let cols = self.input_dim + h_dim;
        let (gw, rest) = grads.split_at_mut(1);
        let (gw, gb) = (&mut gw[0], &mut rest[0]);
        let mut gx = vec![0.0; cache.len() * self.input_dim];
        let mut dh = gy.to_vec();
        let mut dc = vec![0.0; h_dim];
        let mut dz = vec![0.0; 4 * h_dim];
        for (t, step) in cache.iter().enumerate().rev() {
            for j in 0..h_dim {
                let (i, f, g, o) = (
                    step.gates[j],
                    step.gates[h_dim + j],
                    step.gates[2 * h_dim + j],
                    step.gates[3 * h_dim + j],
                );
                let tc = step.tanh_c[j];
                let d_o = dh[j] * tc;
                dc[j] += dh[j] * o * (1.0 - tc * tc);
                dz[j] = dc[j] * g * i * (1.0 - i);
                dz[h_dim + j] = dc[j] * step.c_prev[j] * f * (1.0 - f);
                dz[2 * h_dim + j] = dc[j] * i * (1.0 - g * g);
                dz[3 * h_dim + j] = d_o * o * (1.0 - o);
                dc[j] *= f;
            }
            let mut dxh = vec![0.0; cols];
            for (r, &d) in dz.iter().enumerate() {
                gb[r] += d;
                let row = &self.weight[r * cols..(r + 1) * cols];
                let grow = &mut gw[r * cols..(r + 1) * cols];
                for k in 0..cols {
                    grow[k] += d * step.xh[k];
                    dxh[k] += d * row[k];
                }
            }
            gx[t * self.input_dim..(t + 1) * self.input_dim].copy_from_slice(&dxh[..self.input_dim]);
            dh.copy_from_slice(&dxh[self.input_dim..]);
        }
        gx
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Layer {
    Dense(Dense),
    Relu,
    Conv1d(Conv1d),
    MaxPool1d(MaxPool1d),
    Lstm(Lstm),
}

/// Forward-pass state kept for the backward pass.
#[derive(Debug, Clone)]
pub enum Cache {
    Input(Vec<f64>),
    Pool { argmax: Vec<usize>, in_len: usize },
    Lstm(Vec<LstmStep>),
}

impl Layer {
    pub fn forward(&self, x: &[f64]) -> (Vec<f64>, Cache) {
        match self {
            Layer::Dense(d) => (d.forward(x), Cache::Input(x.to_vec())),
            Layer::Relu => (x.iter().map(|&v| v.max(0.0)).collect(), Cache::Input(x.to_vec())),
            Layer::Conv1d(c) => (c.forward(x), Cache::Input(x.to_vec())),
            Layer::MaxPool1d(p) => {
                let (y, argmax) = p.forward(x);
                (y, Cache::Pool { argmax, in_len: x.len() })
            }
            Layer::Lstm(l) => {
                let (h, steps) = l.forward(x);
                (h, Cache::Lstm(steps))
            }
        }
    }

    /// Forward pass without keeping activations.
    pub fn infer(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Layer::Dense(d) => d.forward(x),
            Layer::Relu => x.iter().map(|&v| v.max(0.0)).collect(),
            Layer::Conv1d(c) => c.forward(x),
            Layer::MaxPool1d(p) => p.forward(x).0,
            Layer::Lstm(l) => l.forward(x).0,
        }
    }

    /// Accumulates parameter gradients into `grads` and returns the input gradient.
    pub fn backward(&self, cache: &Cache, gy: &[f64], grads: &mut [Vec<f64>]) -> Vec<f64> {
        match (self, cache) {
            (Layer::Dense(d), Cache::Input(x)) => d.backward(x, gy, grads),
            (Layer::Relu, Cache::Input(x)) => {
                x.iter().zip(gy).map(|(&v, &g)| if v > 0.0 { g } else { 0.0 }).collect()
            }
            (Layer::Conv1d(c), Cache::Input(x)) => c.backward(x, gy, grads),
            (Layer::MaxPool1d(_), Cache::Pool { argmax, in_len }) => {
                let mut gx = vec![0.0; *in_len];
                for (&i, &g) in argmax.iter().zip(gy) {
                    gx[i] += g;
                }
                gx
            }
            (Layer::Lstm(l), Cache::Lstm(steps)) => l.backward(steps, gy, grads),
            _ => unreachable!("cache does not belong to this layer"),
        }
    }

    pub fn params(&self) -> Vec<&Vec<f64>> {
        match self {
            Layer::Dense(d) => vec![&d.weight, &d.bias],
            Layer::Conv1d(c) => vec![&c.weight, &c.bias],
            Layer::Lstm(l) => vec![&l.weight, &l.bias],
            Layer::Relu | Layer::MaxPool1d(_) => vec![],
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Vec<f64>> {
        match self {
            Layer::Dense(d) => vec![&mut d.weight, &mut d.bias],
            Layer::Conv1d(c) => vec![&mut c.weight, &mut c.bias],
            Layer::Lstm(l) => vec![&mut l.weight, &mut l.bias],
            Layer::Relu | Layer::MaxPool1d(_) => vec![],
        }
    }
}
