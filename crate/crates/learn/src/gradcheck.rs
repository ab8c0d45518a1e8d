//! Central finite-difference verification of analytic gradients.

use serde::{Deserialize, Serialize};

use crate::loss::softmax_cross_entropy;
use crate::network::{Grads, Sequential};

/// Scalar loss attached to a component's output for checking.
#[derive(Debug, Clone)]
pub enum Head {
    /// `loss = Σ r_i · y_i` for a fixed vector `r`.
    Projection(Vec<f64>),
    SoftmaxCrossEntropy { target: usize },
}

impl Head {
    pub fn loss_and_grad(&self, y: &[f64]) -> (f64, Vec<f64>) {
        match self {
            Head::Projection(r) => (r.iter().zip(y).map(|(a, b)| a * b).sum(), r.clone()),
            Head::SoftmaxCrossEntropy { target } => softmax_cross_entropy(y, *target),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub max_param_error: f64,
    pub max_input_error: f64,
    pub checked: usize,
}

/// Gradients smaller than this in both routes are compared absolutely.
const ABS_FLOOR: f64 = 1e-7;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(ABS_FLOOR)
}

fn loss_of(net: &Sequential, head: &Head, x: &[f64]) -> f64 {
    head.loss_and_grad(&net.infer(x)).0
}

/// Compares backpropagated gradients with central differences for every
/// parameter and every input element.
pub fn gradient_check(net: &Sequential, input: &[f64], head: &Head, epsilon: f64) -> GradCheckReport {
    let (y, caches) = net.forward(input);
    let (_, gy) = head.loss_and_grad(&y);
    let mut grads = Grads::zeros_like(net);
    let gx = net.backward(&caches, &gy, &mut grads);
    let analytic = grads.flatten();

    let mut probe = net.clone();
    let mut max_param_error: f64 = 0.0;
    for (i, &a) in analytic.iter().enumerate() {
        let orig = *probe.param_at(i).expect("index in range");
        *probe.param_at(i).unwrap() = orig + epsilon;
        let plus = loss_of(&probe, head, input);
        *probe.param_at(i).unwrap() = orig - epsilon;
        let minus = loss_of(&probe, head, input);
        *probe.param_at(i).unwrap() = orig;
        max_param_error = max_param_error.max(relative_error(a, (plus - minus) / (2.0 * epsilon)));
    }

    let mut max_input_error: f64 = 0.0;
    let mut x = input.to_vec();
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + epsilon;
        let plus = loss_of(net, head, &x);
        x[i] = orig - epsilon;
        let minus = loss_of(net, head, &x);
        x[i] = orig;
        max_input_error = max_input_error.max(relative_error(gx[i], (plus - minus) / (2.0 * epsilon)));
    }

    GradCheckReport {
        max_rel_error: max_param_error.max(max_input_error),
        max_param_error,
        max_input_error,
        checked: analytic.len() + input.len(),
    }
}
