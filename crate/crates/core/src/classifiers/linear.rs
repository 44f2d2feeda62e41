//! Linear log-odds models: L2-regularised logistic regression and LDA.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::features::N_FEATURES;

use super::boosting::sigmoid;
use super::coalition::{masked_seq_sums, seq_sum};
use super::standardize::Row;

/// `score = sigmoid(w . z + bias)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn logit(&self, z: &Row) -> f64 {
        seq_sum((0..N_FEATURES).map(|j| self.weights[j] * z[j])) + self.bias
    }

    pub fn score(&self, z: &Row) -> f64 {
        sigmoid(self.logit(z))
    }

    pub fn coalition_scores(&self, x: &Row, b: &Row, out: &mut [f64]) {
        let wx: Row = std::array::from_fn(|j| self.weights[j] * x[j]);
        let wb: Row = std::array::from_fn(|j| self.weights[j] * b[j]);
        masked_seq_sums(&wx, &wb, out);
        out.iter_mut().for_each(|v| *v = sigmoid(*v + self.bias));
    }

    pub(crate) fn is_well_formed(&self) -> bool {
        self.weights.len() == N_FEATURES
            && self.weights.iter().all(|w| w.is_finite())
            && self.bias.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub l2: f64,
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            l2: 1.0,
            grad_tol: 1e-8,
            max_iter: 5000,
        }
    }
}

fn softplus(s: f64) -> f64 {
    s.max(0.0) + (-s.abs()).exp().ln_1p()
}

/// `sum_i [softplus(s_i) - y_i s_i] + l2/2 * |w|^2` and its gradient (bias last).
fn objective(x: &[Row], y: &[f64], theta: &[f64], l2: f64, grad: Option<&mut [f64]>) -> f64 {
    let (w, b) = theta.split_at(N_FEATURES);
    let mut loss = 0.0;
    let mut g = [0.0; N_FEATURES + 1];
    for (xi, &yi) in x.iter().zip(y) {
        let s = seq_sum((0..N_FEATURES).map(|j| w[j] * xi[j])) + b[0];
        loss += softplus(s) - yi * s;
        let d = sigmoid(s) - yi;
        for j in 0..N_FEATURES {
            g[j] += d * xi[j];
        }
        g[N_FEATURES] += d;
    }
    let wsq: f64 = w.iter().map(|v| v * v).sum();
    loss += 0.5 * l2 * wsq;
    if let Some(out) = grad {
        for j in 0..N_FEATURES {
            out[j] = g[j] + l2 * w[j];
        }
        out[N_FEATURES] = g[N_FEATURES];
    }
    loss
}

/// Full-batch gradient descent with Armijo backtracking.
pub fn fit_logistic(x: &[Row], y: &[f64], params: &LogisticParams) -> LinearModel {
    let mut theta = vec![0.0; N_FEATURES + 1];
    let mut grad = vec![0.0; N_FEATURES + 1];
    let mut f = objective(x, y, &theta, params.l2, Some(&mut grad));
    let mut step = 1.0 / x.len().max(1) as f64;
    let mut trial = vec![0.0; N_FEATURES + 1];
    for _ in 0..params.max_iter {
        let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gmax < params.grad_tol {
            break;
        }
        let gsq: f64 = grad.iter().map(|g| g * g).sum();
        step *= 2.0;
        loop {
            for k in 0..theta.len() {
                trial[k] = theta[k] - step * grad[k];
            }
            let ft = objective(x, y, &trial, params.l2, None);
            if ft <= f - 0.5 * step * gsq || step < 1e-20 {
                break;
            }
            step *= 0.5;
        }
        std::mem::swap(&mut theta, &mut trial);
        f = objective(x, y, &theta, params.l2, Some(&mut grad));
    }
    LinearModel {
        weights: theta[..N_FEATURES].to_vec(),
        bias: theta[N_FEATURES],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    pub ridge: f64,
}

impl Default for LdaParams {
    fn default() -> Self {
        Self { ridge: 1e-6 }
    }
}

type Mat = SMatrix<f64, N_FEATURES, N_FEATURES>;
type Vecn = SVector<f64, N_FEATURES>;

/// Shared-covariance Gaussian classes. The pooled within-class covariance is
/// normalised by N with `ridge` added to its diagonal; the log-odds are
/// `w . z + b` with `w = S^-1 (mu1 - mu0)` and
/// `b = -(mu1 + mu0) . w / 2 + ln(n1 / n0)`.
pub fn fit_lda(x: &[Row], y: &[f64], params: &LdaParams) -> LinearModel {
    let n = x.len() as f64;
    let mut mu = [Vecn::zeros(), Vecn::zeros()];
    let mut count = [0.0f64; 2];
    for (xi, &yi) in x.iter().zip(y) {
        let c = usize::from(yi > 0.5);
        mu[c] += Vecn::from_row_slice(xi);
        count[c] += 1.0;
    }
    mu[0] /= count[0];
    mu[1] /= count[1];
    let mut cov = Mat::zeros();
    for (xi, &yi) in x.iter().zip(y) {
        let d = Vecn::from_row_slice(xi) - mu[usize::from(yi > 0.5)];
        cov += d * d.transpose();
    }
    cov /= n;
    for j in 0..N_FEATURES {
        cov[(j, j)] += params.ridge;
    }
    let diff = mu[1] - mu[0];
    let w = match cov.cholesky() {
        Some(ch) => ch.solve(&diff),
        None => cov.lu().solve(&diff).unwrap_or_else(Vecn::zeros),
    };
    let bias = -0.5 * (mu[1] + mu[0]).dot(&w) + (count[1] / count[0]).ln();
    LinearModel {
        weights: w.iter().copied().collect(),
        bias,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> (Vec<Row>, Vec<f64>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let t = i as f64 * 0.1;
            let mut a = [0.0; N_FEATURES];
            a[0] = 2.0 + (t * 3.1).sin();
            a[1] = 1.0 + (t * 1.7).cos();
            let mut b = [0.0; N_FEATURES];
            b[0] = -2.0 + (t * 2.3).cos();
            b[1] = -1.0 + (t * 0.9).sin();
            x.push(a);
            y.push(1.0);
            x.push(b);
            y.push(0.0);
        }
        (x, y)
    }

    #[test]
    fn logistic_gradient_matches_finite_differences() {
        let (x, y) = blobs();
        let theta: Vec<f64> = (0..=N_FEATURES).map(|k| 0.05 * k as f64 - 0.3).collect();
        let mut g = vec![0.0; N_FEATURES + 1];
        objective(&x, &y, &theta, 1.0, Some(&mut g));
        for k in [0, 1, 5, N_FEATURES] {
            let h = 1e-6;
            let mut p = theta.clone();
            p[k] += h;
            let mut m = theta.clone();
            m[k] -= h;
            let fd = (objective(&x, &y, &p, 1.0, None) - objective(&x, &y, &m, 1.0, None)) / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-5 * (1.0 + g[k].abs()), "k={k}: {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn logistic_separates_blobs() {
        let (x, y) = blobs();
        let m = fit_logistic(&x, &y, &LogisticParams::default());
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(m.score(xi) > 0.5, *yi > 0.5);
        }
    }

    #[test]
    fn lda_separates_blobs() {
        let (x, y) = blobs();
        let m = fit_lda(&x, &y, &LdaParams::default());
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(m.score(xi) > 0.5, *yi > 0.5);
        }
    }
}
