//! Random forest and extremely randomized trees.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::N_FEATURES;
use crate::rng::{derive_seed, rng_from_seed};

use super::coalition::accumulate_tree;
use super::standardize::Row;
use super::tree::{grow, GrowParams, Splitter, Target, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features examined per split; `3 = floor(sqrt(14))`.
    pub max_features: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_features: 3,
        }
    }
}

/// Majority-vote ensemble; each tree votes Good when its leaf fraction exceeds 0.5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

#[inline]
fn vote(p: f64) -> f64 {
    if p > 0.5 {
        1.0
    } else {
        0.0
    }
}

impl Forest {
    /// Random forest: bootstrap of size N per tree, best split among `max_features` features.
    pub fn fit_random_forest(x: &[Row], y: &[f64], params: &ForestParams, seed: u64) -> Self {
        Self::fit(x, y, params, seed, true, Splitter::Best)
    }

    /// Extra trees: whole training set per tree, one random threshold per candidate feature.
    pub fn fit_extra_trees(x: &[Row], y: &[f64], params: &ForestParams, seed: u64) -> Self {
        Self::fit(x, y, params, seed, false, Splitter::Random)
    }

    fn fit(x: &[Row], y: &[f64], params: &ForestParams, seed: u64, bootstrap: bool, splitter: Splitter) -> Self {
        let n = x.len();
        let grow_params = GrowParams {
            max_depth: None,
            min_samples_split: 2,
            max_features: Some(params.max_features),
            splitter,
        };
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng_from_seed(derive_seed(seed, t as u64));
                let mut w = vec![1.0; n];
                if bootstrap {
                    w.iter_mut().for_each(|c| *c = 0.0);
                    for _ in 0..n {
                        w[rng.random_range(0..n)] += 1.0;
                    }
                }
                let idx = (0..n).filter(|&i| w[i] > 0.0).collect();
                grow(x, Target::Gini { y, w: &w }, idx, grow_params, &mut rng)
            })
            .collect();
        Forest { trees }
    }

    pub fn score(&self, z: &Row) -> f64 {
        let mut votes = 0.0;
        for t in &self.trees {
            votes += vote(t.predict(z));
        }
        votes / self.trees.len() as f64
    }

    pub fn coalition_scores(&self, x: &Row, b: &Row, out: &mut [f64]) {
        out.fill(0.0);
        for t in &self.trees {
            accumulate_tree(t, x, b, &vote, out);
        }
        let n = self.trees.len() as f64;
        out.iter_mut().for_each(|v| *v /= n);
    }

    pub fn used_features(&self) -> u32 {
        self.trees.iter().fold(0, |m, t| m | t.used_features())
    }

    pub(crate) fn is_well_formed(&self) -> bool {
        !self.trees.is_empty() && self.trees.iter().all(Tree::is_well_formed)
    }
}

/// Single CART tree scored by its leaf fraction of Good.
pub fn fit_decision_tree(x: &[Row], y: &[f64], params: GrowParams, seed: u64) -> Tree {
    let w = vec![1.0; x.len()];
    grow(x, Target::Gini { y, w: &w }, (0..x.len()).collect(), params, &mut rng_from_seed(seed))
}

const _: () = assert!(N_FEATURES <= 32);
