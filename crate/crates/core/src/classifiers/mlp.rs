//! One-hidden-layer perceptron (ReLU hidden units, sigmoid output) trained
//! with Adam on binary cross-entropy.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::features::N_FEATURES;
use crate::rng::rng_from_seed;

use super::boosting::sigmoid;
use super::coalition::{masked_seq_sums, seq_sum, N_COALITIONS};
use super::standardize::Row;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self {
            hidden: 100,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 32,
            epochs: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    /// `hidden x 14`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], p: &MlpParams) {
        self.t += 1;
        let c1 = 1.0 - p.beta1.powi(self.t);
        let c2 = 1.0 - p.beta2.powi(self.t);
        for k in 0..params.len() {
            self.m[k] = p.beta1 * self.m[k] + (1.0 - p.beta1) * grad[k];
            self.v[k] = p.beta2 * self.v[k] + (1.0 - p.beta2) * grad[k] * grad[k];
            let mh = self.m[k] / c1;
            let vh = self.v[k] / c2;
            params[k] -= p.learning_rate * mh / (vh.sqrt() + p.epsilon);
        }
    }
}

impl Mlp {
    fn hidden(&self) -> usize {
        self.b1.len()
    }

    fn pre_activation(&self, unit: usize, z: &Row) -> f64 {
        let w = &self.w1[unit * N_FEATURES..(unit + 1) * N_FEATURES];
        seq_sum((0..N_FEATURES).map(|j| w[j] * z[j])) + self.b1[unit]
    }

    pub fn logit(&self, z: &Row) -> f64 {
        seq_sum((0..self.hidden()).map(|u| self.w2[u] * self.pre_activation(u, z).max(0.0))) + self.b2
    }

    pub fn score(&self, z: &Row) -> f64 {
        sigmoid(self.logit(z))
    }

    /// Glorot-uniform initialisation of weights and biases, shuffled mini-batches.
    pub fn fit(x: &[Row], y: &[f64], params: &MlpParams, seed: u64) -> Self {
        let h = params.hidden;
        let mut rng = rng_from_seed(seed);
        let bound1 = (6.0 / (N_FEATURES + h) as f64).sqrt();
        let bound2 = (6.0 / (h + 1) as f64).sqrt();
        // flat parameter vector: w1 | b1 | w2 | b2
        let n_params = h * N_FEATURES + h + h + 1;
        let mut theta = Vec::with_capacity(n_params);
        for _ in 0..h * N_FEATURES + h {
            theta.push(rng.random_range(-bound1..bound1));
        }
        for _ in 0..h + 1 {
            theta.push(rng.random_range(-bound2..bound2));
        }
        let (o_b1, o_w2, o_b2) = (h * N_FEATURES, h * N_FEATURES + h, h * N_FEATURES + 2 * h);
        let mut adam = Adam::new(n_params);
        let mut grad = vec![0.0; n_params];
        let mut order: Vec<usize> = (0..x.len()).collect();
        let mut pre = vec![0.0; h];
        for _ in 0..params.epochs {
            order.shuffle(&mut rng);
            for batch in order.chunks(params.batch_size.max(1)) {
                grad.fill(0.0);
                for &i in batch {
                    let z = &x[i];
                    let mut out = theta[o_b2];
                    for u in 0..h {
                        let w = &theta[u * N_FEATURES..(u + 1) * N_FEATURES];
                        pre[u] = seq_sum((0..N_FEATURES).map(|j| w[j] * z[j])) + theta[o_b1 + u];
                        out += theta[o_w2 + u] * pre[u].max(0.0);
                    }
                    let delta = sigmoid(out) - y[i];
                    grad[o_b2] += delta;
                    for u in 0..h {
                        if pre[u] <= 0.0 {
                            continue;
                        }
                        grad[o_w2 + u] += delta * pre[u];
                        let dh = delta * theta[o_w2 + u];
                        grad[o_b1 + u] += dh;
                        for j in 0..N_FEATURES {
                            grad[u * N_FEATURES + j] += dh * z[j];
                        }
                    }
                }
                let inv = 1.0 / batch.len() as f64;
                grad.iter_mut().for_each(|g| *g *= inv);
                adam.step(&mut theta, &grad, params);
            }
        }
        Mlp {
            w1: theta[..o_b1].to_vec(),
            b1: theta[o_b1..o_w2].to_vec(),
            w2: theta[o_w2..o_b2].to_vec(),
            b2: theta[o_b2],
        }
    }

    pub fn coalition_scores(&self, x: &Row, b: &Row, out: &mut [f64]) {
        let mut pre = vec![0.0; N_COALITIONS];
        out.fill(0.0);
        for u in 0..self.hidden() {
            let w = &self.w1[u * N_FEATURES..(u + 1) * N_FEATURES];
            let wx: Row = std::array::from_fn(|j| w[j] * x[j]);
            let wb: Row = std::array::from_fn(|j| w[j] * b[j]);
            masked_seq_sums(&wx, &wb, &mut pre);
            let (bias, v) = (self.b1[u], self.w2[u]);
            for (o, p) in out.iter_mut().zip(&pre) {
                *o += v * (p + bias).max(0.0);
            }
        }
        out.iter_mut().for_each(|o| *o = sigmoid(*o + self.b2));
    }

    pub(crate) fn is_well_formed(&self) -> bool {
        let h = self.b1.len();
        h > 0
            && self.w1.len() == h * N_FEATURES
            && self.w2.len() == h
            && self
                .w1
                .iter()
                .chain(&self.b1)
                .chain(&self.w2)
                .all(|v| v.is_finite())
            && self.b2.is_finite()
    }
}
