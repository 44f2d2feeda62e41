//! RBF-kernel support vector classifier trained by simplified SMO.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::features::N_FEATURES;
use crate::rng::rng_from_seed;

use super::boosting::sigmoid;
use super::coalition::{masked_products, seq_sum, N_COALITIONS};
use super::standardize::Row;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    /// `None` selects `1 / (n_features * variance of all training values)`.
    pub gamma: Option<f64>,
    pub tol: f64,
    /// Consecutive sweeps without an update before training stops.
    pub max_passes: usize,
    /// Hard cap on the total number of sweeps.
    pub max_total_passes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            gamma: None,
            tol: 1e-3,
            max_passes: 10_000,
            max_total_passes: 100_000,
        }
    }
}

/// Decision function `f(z) = sum_i coef_i K(sv_i, z) + bias`; score `sigmoid(f)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Svm {
    pub gamma: f64,
    pub support_vectors: Vec<Row>,
    pub coef: Vec<f64>,
    pub bias: f64,
}

fn sq_dist(a: &Row, b: &Row) -> f64 {
    seq_sum((0..N_FEATURES).map(|j| {
        let d = a[j] - b[j];
        d * d
    }))
}

pub fn scale_gamma(x: &[Row]) -> f64 {
    let n = (x.len() * N_FEATURES) as f64;
    let mean = x.iter().flatten().sum::<f64>() / n;
    let var = x.iter().flatten().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (N_FEATURES as f64 * var)
    } else {
        1.0
    }
}

impl Svm {
    pub fn fit(x: &[Row], y01: &[f64], params: &SvmParams, seed: u64) -> Self {
        let n = x.len();
        let gamma = params.gamma.unwrap_or_else(|| scale_gamma(x));
        let y: Vec<f64> = y01.iter().map(|&v| if v > 0.5 { 1.0 } else { -1.0 }).collect();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = (-gamma * sq_dist(&x[i], &x[j])).exp();
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        let c = params.c;
        let tol = params.tol;
        let mut alpha = vec![0.0; n];
        let mut b = 0.0;
        // error cache E_i = f(x_i) - y_i
        let mut err: Vec<f64> = y.iter().map(|v| -v).collect();
        let mut rng = rng_from_seed(seed);
        let mut quiet = 0;
        let mut total = 0;
        while quiet < params.max_passes && total < params.max_total_passes && n > 1 {
            let mut changed = 0;
            for i in 0..n {
                let ri = y[i] * err[i];
                if !((ri < -tol && alpha[i] < c) || (ri > tol && alpha[i] > 0.0)) {
                    continue;
                }
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                let (ai, aj) = (alpha[i], alpha[j]);
                let (lo, hi) = if y[i] != y[j] {
                    ((aj - ai).max(0.0), (c + aj - ai).min(c))
                } else {
                    ((ai + aj - c).max(0.0), (ai + aj).min(c))
                };
                if lo >= hi {
                    continue;
                }
                let (kii, kjj, kij) = (k[i * n + i], k[j * n + j], k[i * n + j]);
                let eta = 2.0 * kij - kii - kjj;
                if eta >= 0.0 {
                    continue;
                }
                let aj_new = (aj - y[j] * (err[i] - err[j]) / eta).clamp(lo, hi);
                if (aj_new - aj).abs() < 1e-5 {
                    continue;
                }
                let ai_new = ai + y[i] * y[j] * (aj - aj_new);
                let di = ai_new - ai;
                let dj = aj_new - aj;
                let b1 = b - err[i] - y[i] * di * kii - y[j] * dj * kij;
                let b2 = b - err[j] - y[i] * di * kij - y[j] * dj * kjj;
                let b_new = if ai_new > 0.0 && ai_new < c {
                    b1
                } else if aj_new > 0.0 && aj_new < c {
                    b2
                } else {
                    (b1 + b2) / 2.0
                };
                let db = b_new - b;
                for (t, e) in err.iter_mut().enumerate() {
                    *e += y[i] * di * k[i * n + t] + y[j] * dj * k[j * n + t] + db;
                }
                alpha[i] = ai_new;
                alpha[j] = aj_new;
                b = b_new;
                changed += 1;
            }
            total += 1;
            quiet = if changed == 0 { quiet + 1 } else { 0 };
            // once every sample satisfies the KKT conditions further sweeps cannot change anything
            if changed == 0 && (0..n).all(|i| {
                let ri = y[i] * err[i];
                !((ri < -tol && alpha[i] < c) || (ri > tol && alpha[i] > 0.0))
            }) {
                break;
            }
        }
        let mut support_vectors = Vec::new();
        let mut coef = Vec::new();
        for i in 0..n {
            if alpha[i] > 0.0 {
                support_vectors.push(x[i]);
                coef.push(alpha[i] * y[i]);
            }
        }
        Svm {
            gamma,
            support_vectors,
            coef,
            bias: b,
        }
    }

    pub fn decision(&self, z: &Row) -> f64 {
        let mut f = 0.0;
        for (sv, c) in self.support_vectors.iter().zip(&self.coef) {
            f += c * (-self.gamma * sq_dist(sv, z)).exp();
        }
        f + self.bias
    }

    pub fn score(&self, z: &Row) -> f64 {
        sigmoid(self.decision(z))
    }

    /// Uses `exp(-g * sum d_j^2) = prod exp(-g * d_j^2)`, so each table entry
    /// agrees with [`score`](Self::score) to rounding (about 1e-15 relative)
    /// rather than bit for bit.
    pub fn coalition_scores(&self, x: &Row, b: &Row, out: &mut [f64]) {
        let mut k = vec![0.0; N_COALITIONS];
        out.fill(0.0);
        let g = self.gamma;
        for (sv, &c) in self.support_vectors.iter().zip(&self.coef) {
            let ex: Row = std::array::from_fn(|j| {
                let d = sv[j] - x[j];
                (-g * (d * d)).exp()
            });
            let eb: Row = std::array::from_fn(|j| {
                let d = sv[j] - b[j];
                (-g * (d * d)).exp()
            });
            masked_products(c, &ex, &eb, &mut k);
            out.iter_mut().zip(&k).for_each(|(o, v)| *o += v);
        }
        out.iter_mut().for_each(|v| *v = sigmoid(*v + self.bias));
    }

    pub(crate) fn is_well_formed(&self) -> bool {
        self.support_vectors.len() == self.coef.len()
            && self.gamma.is_finite()
            && self.bias.is_finite()
            && self.coef.iter().all(|c| c.is_finite())
    }
}
