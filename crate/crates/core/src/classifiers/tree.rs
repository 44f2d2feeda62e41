//! CART trees: weighted-Gini classification trees and squared-error
//! regression trees, grown depth-first into a flat node array.
//!
//! Split candidates are compared on `(impurity, feature index, threshold)`,
//! so ties go to the lower feature and then the lower threshold. Samples go
//! left when `value <= threshold`.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::features::N_FEATURES;
use crate::rng::Rng;

use super::standardize::Row;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn constant(value: f64) -> Self {
        Tree {
            nodes: vec![Node::Leaf { value }],
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn predict(&self, z: &Row) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if z[feature] <= threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn rec(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + rec(nodes, left as usize).max(rec(nodes, right as usize))
                }
            }
        }
        rec(&self.nodes, 0)
    }

    /// Bitmask of features used by at least one split.
    pub fn used_features(&self) -> u32 {
        self.nodes.iter().fold(0, |m, n| match n {
            Node::Split { feature, .. } => m | (1 << feature),
            Node::Leaf { .. } => m,
        })
    }

    pub(crate) fn is_well_formed(&self) -> bool {
        !self.nodes.is_empty()
            && self.nodes.iter().enumerate().all(|(i, n)| match *n {
                Node::Leaf { value } => value.is_finite(),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    feature < N_FEATURES
                        && threshold.is_finite()
                        && (left as usize) > i
                        && (right as usize) > i
                        && (left as usize) < self.nodes.len()
                        && (right as usize) < self.nodes.len()
                }
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitter {
    /// Exhaustive search over midpoints of consecutive distinct values.
    Best,
    /// One uniform threshold in `[node min, node max)` per candidate feature.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Number of non-constant features examined per node; `None` = all.
    pub max_features: Option<usize>,
    pub splitter: Splitter,
}

impl Default for GrowParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            max_features: None,
            splitter: Splitter::Best,
        }
    }
}

pub enum Target<'a> {
    /// Binary labels in {0, 1} with sample weights; leaves hold the weighted fraction of 1s.
    Gini { y: &'a [f64], w: &'a [f64] },
    /// Real targets; leaves hold whatever `leaf` returns for the node's samples.
    SquaredError {
        r: &'a [f64],
        leaf: &'a dyn Fn(&[usize]) -> f64,
    },
}

#[derive(Clone, Copy, Default)]
struct Stats {
    a: f64,
    b: f64,
}

impl Target<'_> {
    fn stats(&self, i: usize) -> Stats {
        match self {
            Target::Gini { y, w } => Stats {
                a: w[i],
                b: w[i] * y[i],
            },
            Target::SquaredError { r, .. } => Stats { a: 1.0, b: r[i] },
        }
    }

    fn cost(&self, l: Stats, r: Stats) -> f64 {
        match self {
            Target::Gini { .. } => {
                let g = |s: Stats| if s.a > 0.0 { s.b * (s.a - s.b) / s.a } else { 0.0 };
                g(l) + g(r)
            }
            Target::SquaredError { .. } => -(l.b * l.b / l.a + r.b * r.b / r.a),
        }
    }

    fn is_pure(&self, idx: &[usize]) -> bool {
        match self {
            Target::Gini { y, w } => {
                let wt: f64 = idx.iter().map(|&i| w[i]).sum();
                let wg: f64 = idx.iter().map(|&i| w[i] * y[i]).sum();
                wg <= 0.0 || wg >= wt
            }
            Target::SquaredError { r, .. } => idx.iter().all(|&i| r[i] == r[idx[0]]),
        }
    }

    fn leaf(&self, idx: &[usize]) -> f64 {
        match self {
            Target::Gini { y, w } => {
                let wt: f64 = idx.iter().map(|&i| w[i]).sum();
                let wg: f64 = idx.iter().map(|&i| w[i] * y[i]).sum();
                if wt > 0.0 {
                    wg / wt
                } else {
                    0.0
                }
            }
            Target::SquaredError { leaf, .. } => leaf(idx),
        }
    }
}

struct Candidate {
    cost: f64,
    feature: usize,
    threshold: f64,
}

impl Candidate {
    fn beats(&self, other: &Option<Candidate>) -> bool {
        match other {
            None => true,
            Some(o) => {
                self.cost < o.cost
                    || (self.cost == o.cost
                        && (self.feature < o.feature
                            || (self.feature == o.feature && self.threshold < o.threshold)))
            }
        }
    }
}

struct Grower<'a> {
    x: &'a [Row],
    target: Target<'a>,
    params: GrowParams,
    rng: &'a mut Rng,
    nodes: Vec<Node>,
}

/// Grows a tree on the samples listed in `indices` (samples with zero weight
/// should be left out by the caller).
pub fn grow(x: &[Row], target: Target<'_>, indices: Vec<usize>, params: GrowParams, rng: &mut Rng) -> Tree {
    if indices.is_empty() {
        return Tree::constant(0.0);
    }
    let mut g = Grower {
        x,
        target,
        params,
        rng,
        nodes: Vec::new(),
    };
    g.grow_node(indices, 0);
    Tree { nodes: g.nodes }
}

impl Grower<'_> {
    fn grow_node(&mut self, idx: Vec<usize>, depth: usize) -> u32 {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0 });
        let stop = idx.len() < self.params.min_samples_split.max(2)
            || self.params.max_depth.is_some_and(|d| depth >= d)
            || self.target.is_pure(&idx);
        let split = if stop { None } else { self.best_split(&idx) };
        match split {
            None => {
                self.nodes[id] = Node::Leaf {
                    value: self.target.leaf(&idx),
                };
            }
            Some(c) => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    idx.into_iter().partition(|&i| self.x[i][c.feature] <= c.threshold);
                let left = self.grow_node(l, depth + 1);
                let right = self.grow_node(r, depth + 1);
                self.nodes[id] = Node::Split {
                    feature: c.feature,
                    threshold: c.threshold,
                    left,
                    right,
                };
            }
        }
        id as u32
    }

    fn best_split(&mut self, idx: &[usize]) -> Option<Candidate> {
        let mut order: [usize; N_FEATURES] = std::array::from_fn(|j| j);
        let budget = match self.params.max_features {
            Some(k) if k < N_FEATURES => {
                order.shuffle(self.rng);
                k.max(1)
            }
            _ => N_FEATURES,
        };
        let mut best: Option<Candidate> = None;
        let mut visited = 0;
        for &f in &order {
            if visited == budget {
                break;
            }
            let mut sorted = idx.to_vec();
            sorted.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let lo = self.x[sorted[0]][f];
            let hi = self.x[sorted[sorted.len() - 1]][f];
            if lo >= hi {
                continue;
            }
            visited += 1;
            let cand = match self.params.splitter {
                Splitter::Best => self.scan_feature(f, &sorted),
                Splitter::Random => {
                    let t = self.rng.random_range(lo..hi);
                    Some(self.evaluate_threshold(f, &sorted, t))
                }
            };
            if let Some(c) = cand {
                if c.beats(&best) {
                    best = Some(c);
                }
            }
        }
        best
    }

    fn totals(&self, sorted: &[usize]) -> Stats {
        sorted.iter().fold(Stats::default(), |s, &i| {
            let t = self.target.stats(i);
            Stats {
                a: s.a + t.a,
                b: s.b + t.b,
            }
        })
    }

    fn scan_feature(&self, f: usize, sorted: &[usize]) -> Option<Candidate> {
        let total = self.totals(sorted);
        let mut left = Stats::default();
        let mut best: Option<Candidate> = None;
        for k in 0..sorted.len() - 1 {
            let t = self.target.stats(sorted[k]);
            left.a += t.a;
            left.b += t.b;
            let a = self.x[sorted[k]][f];
            let b = self.x[sorted[k + 1]][f];
            if a >= b {
                continue;
            }
            let right = Stats {
                a: total.a - left.a,
                b: total.b - left.b,
            };
            let mut threshold = a / 2.0 + b / 2.0;
            if threshold >= b || threshold < a {
                threshold = a;
            }
            let cost = self.target.cost(left, right);
            if best.as_ref().is_none_or(|c| cost < c.cost) {
                best = Some(Candidate {
                    cost,
                    feature: f,
                    threshold,
                });
            }
        }
        best
    }

    fn evaluate_threshold(&self, f: usize, sorted: &[usize], threshold: f64) -> Candidate {
        let total = self.totals(sorted);
        let mut left = Stats::default();
        for &i in sorted.iter().take_while(|&&i| self.x[i][f] <= threshold) {
            let t = self.target.stats(i);
            left.a += t.a;
            left.b += t.b;
        }
        let right = Stats {
            a: total.a - left.a,
            b: total.b - left.b,
        };
        Candidate {
            cost: self.target.cost(left, right),
            feature: f,
            threshold,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn row(a: f64, b: f64) -> Row {
        let mut r = [0.0; N_FEATURES];
        r[0] = a;
        r[1] = b;
        r
    }

    #[test]
    fn xor_needs_two_levels_and_is_fit_exactly() {
        let x = vec![row(0.0, 0.0), row(0.0, 1.0), row(1.0, 0.0), row(1.0, 1.0)];
        let y = vec![0.0, 1.0, 1.0, 0.0];
        let w = vec![1.0; 4];
        let t = grow(
            &x,
            Target::Gini { y: &y, w: &w },
            (0..4).collect(),
            GrowParams::default(),
            &mut rng_from_seed(0),
        );
        assert_eq!(t.depth(), 2);
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(t.predict(xi), *yi);
        }
        // zero-gain root split: lowest feature index wins the tie
        assert!(matches!(t.nodes()[0], Node::Split { feature: 0, threshold, .. } if threshold == 0.5));
    }

    #[test]
    fn depth_limit_and_weights() {
        let x: Vec<Row> = (0..6).map(|i| row(i as f64, 0.0)).collect();
        let y = vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let w = vec![1.0, 1.0, 1.0, 1.0, 1.0, 10.0];
        let params = GrowParams {
            max_depth: Some(0),
            ..GrowParams::default()
        };
        let t = grow(&x, Target::Gini { y: &y, w: &w }, (0..6).collect(), params, &mut rng_from_seed(0));
        assert_eq!(t.nodes().len(), 1);
        assert!((t.predict(&x[0]) - 12.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn regression_tree_splits_on_step() {
        let x: Vec<Row> = (0..8).map(|i| row(i as f64, 0.0)).collect();
        let r: Vec<f64> = (0..8).map(|i| if i < 5 { -1.0 } else { 2.0 }).collect();
        let mean = |idx: &[usize]| idx.iter().map(|&i| r[i]).sum::<f64>() / idx.len() as f64;
        let params = GrowParams {
            max_depth: Some(3),
            ..GrowParams::default()
        };
        let t = grow(
            &x,
            Target::SquaredError { r: &r, leaf: &mean },
            (0..8).collect(),
            params,
            &mut rng_from_seed(0),
        );
        assert_eq!(t.nodes().len(), 3);
        assert_eq!(t.predict(&x[4]), -1.0);
        assert_eq!(t.predict(&x[5]), 2.0);
    }

    #[test]
    fn random_splitter_is_seeded() {
        let x: Vec<Row> = (0..20).map(|i| row(i as f64, (i * 7 % 5) as f64)).collect();
        let y: Vec<f64> = (0..20).map(|i| f64::from(u8::from(i % 3 == 0))).collect();
        let w = vec![1.0; 20];
        let params = GrowParams {
            splitter: Splitter::Random,
            max_features: Some(1),
            ..GrowParams::default()
        };
        let a = grow(&x, Target::Gini { y: &y, w: &w }, (0..20).collect(), params, &mut rng_from_seed(3));
        let b = grow(&x, Target::Gini { y: &y, w: &w }, (0..20).collect(), params, &mut rng_from_seed(3));
        assert_eq!(a, b);
        assert!(a.is_well_formed());
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(a.predict(xi), *yi);
        }
    }
}
