//! AdaBoost over decision stumps and gradient boosting with binomial deviance.

use serde::{Deserialize, Serialize};

use crate::rng::rng_from_seed;

use super::coalition::accumulate_tree;
use super::standardize::Row;
use super::tree::{grow, GrowParams, Splitter, Target, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdaBoostParams {
    pub n_estimators: usize,
}

impl Default for AdaBoostParams {
    fn default() -> Self {
        Self { n_estimators: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    pub stumps: Vec<Tree>,
    pub alphas: Vec<f64>,
}

#[inline]
fn stump_sign(p: f64) -> f64 {
    if p > 0.5 {
        1.0
    } else {
        -1.0
    }
}

impl AdaBoost {
    /// Binary SAMME: `alpha = ln((1 - err) / err)`, misclassified weights scaled
    /// by `exp(alpha)` and renormalised. Stops after a perfect stump (kept with
    /// `alpha = 1`) or at the first stump no better than chance (dropped, unless
    /// it is the only one).
    pub fn fit(x: &[Row], y: &[f64], params: &AdaBoostParams, seed: u64) -> Self {
        let n = x.len();
        let mut w = vec![1.0 / n as f64; n];
        let mut rng = rng_from_seed(seed);
        let stump_params = GrowParams {
            max_depth: Some(1),
            min_samples_split: 2,
            max_features: None,
            splitter: Splitter::Best,
        };
        let mut model = AdaBoost {
            stumps: Vec::new(),
            alphas: Vec::new(),
        };
        for _ in 0..params.n_estimators {
            let idx = (0..n).filter(|&i| w[i] > 0.0).collect();
            let stump = grow(x, Target::Gini { y, w: &w }, idx, stump_params, &mut rng);
            let miss: Vec<bool> = (0..n)
                .map(|i| (stump_sign(stump.predict(&x[i])) > 0.0) != (y[i] > 0.5))
                .collect();
            let total: f64 = w.iter().sum();
            let err = w.iter().zip(&miss).filter(|(_, m)| **m).map(|(w, _)| w).sum::<f64>() / total;
            if err <= 0.0 {
                model.stumps.push(stump);
                model.alphas.push(1.0);
                break;
            }
            if err >= 0.5 {
                if model.stumps.is_empty() {
                    model.stumps.push(stump);
                    model.alphas.push(1.0);
                }
                break;
            }
            let alpha = ((1.0 - err) / err).ln();
            let boost = alpha.exp();
            for (wi, m) in w.iter_mut().zip(&miss) {
                if *m {
                    *wi *= boost;
                }
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|wi| *wi /= s);
            model.stumps.push(stump);
            model.alphas.push(alpha);
        }
        model
    }

    fn finish(&self, f: f64) -> f64 {
        let total: f64 = self.alphas.iter().sum();
        ((f / total + 1.0) / 2.0).clamp(0.0, 1.0)
    }

    /// `(F / sum(alpha) + 1) / 2` with `F = sum(alpha_t * h_t)`, `h_t` in {-1, +1}.
    pub fn score(&self, z: &Row) -> f64 {
        let mut f = 0.0;
        for (s, a) in self.stumps.iter().zip(&self.alphas) {
            f += a * stump_sign(s.predict(z));
        }
        self.finish(f)
    }

    pub fn coalition_scores(&self, x: &Row, b: &Row, out: &mut [f64]) {
        out.fill(0.0);
        for (s, &a) in self.stumps.iter().zip(&self.alphas) {
            accumulate_tree(s, x, b, &|p| a * stump_sign(p), out);
        }
        out.iter_mut().for_each(|v| *v = self.finish(*v));
    }

    pub(crate) fn is_well_formed(&self) -> bool {
        !self.stumps.is_empty()
            && self.stumps.len() == self.alphas.len()
            && self.alphas.iter().all(|a| a.is_finite())
            && self.alphas.iter().sum::<f64>() > 0.0
            && self.stumps.iter().all(Tree::is_well_formed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientBoostingParams {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
}

impl Default for GradientBoostingParams {
    fn default() -> Self {
        Self {
            n_estimators: 100,
            max_depth: 3,
            learning_rate: 0.1,
        }
    }
}

/// Additive log-odds model; leaf values already include the learning rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosting {
    pub init: f64,
    pub trees: Vec<Tree>,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl GradientBoosting {
    /// Starts from the training log-odds; each round fits a squared-error tree
    /// to `y - p` and sets each leaf to one Newton step `sum(r) / sum(p(1-p))`.
    pub fn fit(x: &[Row], y: &[f64], params: &GradientBoostingParams, seed: u64) -> Self {
        let n = x.len();
        let p_bar = y.iter().sum::<f64>() / n as f64;
        let init = (p_bar / (1.0 - p_bar)).ln();
        let mut f = vec![init; n];
        let mut rng = rng_from_seed(seed);
        let grow_params = GrowParams {
            max_depth: Some(params.max_depth),
            min_samples_split: 2,
            max_features: None,
            splitter: Splitter::Best,
        };
        let mut trees = Vec::with_capacity(params.n_estimators);
        for _ in 0..params.n_estimators {
            let p: Vec<f64> = f.iter().map(|&v| sigmoid(v)).collect();
            let r: Vec<f64> = (0..n).map(|i| y[i] - p[i]).collect();
            let lr = params.learning_rate;
            let newton = |idx: &[usize]| {
                let num: f64 = idx.iter().map(|&i| r[i]).sum();
                let den: f64 = idx.iter().map(|&i| p[i] * (1.0 - p[i])).sum();
                if den.abs() < 1e-150 {
                    0.0
                } else {
                    lr * num / den
                }
            };
            let tree = grow(
                x,
                Target::SquaredError { r: &r, leaf: &newton },
                (0..n).collect(),
                grow_params,
                &mut rng,
            );
            for i in 0..n {
                f[i] += tree.predict(&x[i]);
            }
            trees.push(tree);
        }
        GradientBoosting { init, trees }
    }

    pub fn score(&self, z: &Row) -> f64 {
        let mut f = self.init;
        for t in &self.trees {
            f += t.predict(z);
        }
        sigmoid(f)
    }

    pub fn coalition_scores(&self, x: &Row, b: &Row, out: &mut [f64]) {
        out.fill(self.init);
        for t in &self.trees {
            accumulate_tree(t, x, b, &|v| v, out);
        }
        out.iter_mut().for_each(|v| *v = sigmoid(*v));
    }

    pub(crate) fn is_well_formed(&self) -> bool {
        self.init.is_finite() && self.trees.iter().all(Tree::is_well_formed)
    }
}
