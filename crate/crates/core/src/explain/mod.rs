//! Interventional Shapley attributions over the 14 features.
//!
//! The value of a coalition `S` is the mean score, over the background rows,
//! of the input that takes the features in `S` from the instance and the rest
//! from the background row. Exact mode enumerates all 2^14 coalitions.

mod plot;

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::coalition::{composite, N_COALITIONS};
use crate::classifiers::{Row, TrainedModel};
use crate::error::{Error, Result};
use crate::features::{FeatureVector, FEATURE_NAMES, N_FEATURES};
use crate::rng::rng_from_seed;

pub use plot::{beeswarm_csv, beeswarm_svg, render_beeswarm};

/// Anything that maps a raw 14-feature row to a score.
pub trait Scorer: Sync {
    fn score(&self, x: &Row) -> f64;

    /// `out[S]` = score of the composite taking bit-`j` features from `x`, the rest from `b`.
    fn coalition_scores(&self, x: &Row, b: &Row, out: &mut [f64]) {
        for (mask, o) in out.iter_mut().enumerate() {
            *o = self.score(&composite(x, b, mask));
        }
    }
}

impl<F: Fn(&Row) -> f64 + Sync> Scorer for F {
    fn score(&self, x: &Row) -> f64 {
        self(x)
    }
}

impl Scorer for TrainedModel {
    fn score(&self, x: &Row) -> f64 {
        TrainedModel::score(self, &FeatureVector(*x))
    }

    fn coalition_scores(&self, x: &Row, b: &Row, out: &mut [f64]) {
        // z-scoring is per feature, so it commutes with forming composites
        let zx = self.standardize(&FeatureVector(*x));
        let zb = self.standardize(&FeatureVector(*b));
        TrainedModel::coalition_scores(self, &zx, &zb, out);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub instance_id: String,
    pub phi: [f64; N_FEATURES],
    /// Mean score over the background.
    pub base_value: f64,
    /// Score at the instance.
    pub fx: f64,
    /// Per-feature standard error of the permutation estimate (sampled mode only).
    pub std_err: Option<[f64; N_FEATURES]>,
}

impl Attribution {
    /// `sum(phi) - (fx - base_value)`.
    pub fn efficiency_gap(&self) -> f64 {
        self.phi.iter().sum::<f64>() - (self.fx - self.base_value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ExplainMode {
    Exact,
    Sampled { permutations: usize, seed: u64 },
}

/// `v(S)` for every coalition, averaged over `bg` in order.
pub fn coalition_values(model: &impl Scorer, x: &Row, bg: &[Row]) -> Vec<f64> {
    let mut v = vec![0.0; N_COALITIONS];
    let mut buf = vec![0.0; N_COALITIONS];
    for b in bg {
        model.coalition_scores(x, b, &mut buf);
        v.iter_mut().zip(&buf).for_each(|(a, s)| *a += s);
    }
    let n = bg.len() as f64;
    v.iter_mut().for_each(|a| *a /= n);
    v
}

/// `|S|! (d - |S| - 1)! / d!` indexed by `|S|`.
fn shapley_weights() -> [f64; N_FEATURES] {
    let d = N_FEATURES;
    let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
    std::array::from_fn(|s| fact(s) * fact(d - s - 1) / fact(d))
}

/// Shapley values from a full coalition value table.
pub fn shapley_from_values(v: &[f64]) -> [f64; N_FEATURES] {
    assert_eq!(v.len(), N_COALITIONS);
    let w = shapley_weights();
    std::array::from_fn(|i| {
        let bit = 1usize << i;
        let mut acc = 0.0;
        for s in 0..N_COALITIONS {
            if s & bit == 0 {
                acc += w[s.count_ones() as usize] * (v[s | bit] - v[s]);
            }
        }
        acc
    })
}

/// Exact attribution by enumerating all coalitions.
pub fn shapley_exact(model: &impl Scorer, id: &str, x: &Row, bg: &[Row]) -> Result<Attribution> {
    if bg.is_empty() {
        return Err(Error::InvalidSpec("background set is empty".into()));
    }
    let v = coalition_values(model, x, bg);
    Ok(Attribution {
        instance_id: id.to_string(),
        phi: shapley_from_values(&v),
        base_value: v[0],
        fx: v[N_COALITIONS - 1],
        std_err: None,
    })
}

/// Permutation-sampling estimate: each permutation pairs a random feature
/// order with one random background row. The residual against
/// `fx - base_value` is then spread over features in proportion to `|phi|`
/// (evenly if all are zero) so that the attribution stays additive.
pub fn shapley_sampled(
    model: &impl Scorer,
    id: &str,
    x: &Row,
    bg: &[Row],
    n_permutations: usize,
    seed: u64,
) -> Result<Attribution> {
    if bg.is_empty() {
        return Err(Error::InvalidSpec("background set is empty".into()));
    }
    if n_permutations == 0 {
        return Err(Error::InvalidSpec("at least one permutation is required".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut order: [usize; N_FEATURES] = std::array::from_fn(|j| j);
    let mut mean = [0.0; N_FEATURES];
    let mut m2 = [0.0; N_FEATURES];
    for k in 0..n_permutations {
        order.shuffle(&mut rng);
        let mut z = bg[rng.random_range(0..bg.len())];
        let mut prev = model.score(&z);
        for &j in &order {
            z[j] = x[j];
            let cur = model.score(&z);
            let delta = cur - prev;
            prev = cur;
            // Welford update
            let d = delta - mean[j];
            mean[j] += d / (k + 1) as f64;
            m2[j] += d * (delta - mean[j]);
        }
    }
    let n = n_permutations as f64;
    let std_err: [f64; N_FEATURES] = std::array::from_fn(|j| {
        if n_permutations > 1 {
            (m2[j] / (n - 1.0) / n).sqrt()
        } else {
            0.0
        }
    });
    let base_value = bg.iter().map(|b| model.score(b)).sum::<f64>() / bg.len() as f64;
    let fx = model.score(x);
    let mut phi = mean;
    let residual = (fx - base_value) - phi.iter().sum::<f64>();
    let total_abs: f64 = phi.iter().map(|p| p.abs()).sum();
    if residual != 0.0 {
        for p in phi.iter_mut() {
            *p += if total_abs > 0.0 {
                residual * p.abs() / total_abs
            } else {
                residual / N_FEATURES as f64
            };
        }
    }
    Ok(Attribution {
        instance_id: id.to_string(),
        phi,
        base_value,
        fx,
        std_err: Some(std_err),
    })
}

/// Explains each `(id, row)` in parallel; output order follows `instances`.
pub fn explain_all(
    model: &impl Scorer,
    instances: &[(String, Row)],
    bg: &[Row],
    mode: ExplainMode,
) -> Result<Vec<Attribution>> {
    instances
        .par_iter()
        .enumerate()
        .map(|(i, (id, x))| match mode {
            ExplainMode::Exact => shapley_exact(model, id, x, bg),
            ExplainMode::Sampled { permutations, seed } => {
                shapley_sampled(model, id, x, bg, permutations, crate::rng::derive_seed(seed, i as u64))
            }
        })
        .collect()
}

/// Picks `n` rows without replacement (all of them when `n >= rows.len()`),
/// returned in their original order.
pub fn select_background(rows: &[Row], n: usize, seed: u64) -> Vec<Row> {
    if n >= rows.len() {
        return rows.to_vec();
    }
    let mut idx = rand::seq::index::sample(&mut rng_from_seed(seed), rows.len(), n).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| rows[i]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryPoint {
    pub instance_id: String,
    pub phi: f64,
    /// Feature value z-scored over the summarised instances.
    pub value_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub name: String,
    pub index: usize,
    pub mean_abs_phi: f64,
    pub points: Vec<SummaryPoint>,
}

/// Features ordered by descending mean `|phi|` (ties by canonical order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryData {
    pub features: Vec<FeatureSummary>,
}

impl SummaryData {
    pub fn ranking(&self) -> Vec<&str> {
        self.features.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn n_instances(&self) -> usize {
        self.features.first().map_or(0, |f| f.points.len())
    }

    /// `rank,feature,mean_abs_phi`.
    pub fn importance_csv(&self) -> String {
        let mut out = String::from("rank,feature,mean_abs_phi\n");
        for (r, f) in self.features.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", r + 1, f.name, f.mean_abs_phi);
        }
        out
    }
}

pub fn summary_table(attributions: &[Attribution], features: &[FeatureVector]) -> Result<SummaryData> {
    if attributions.len() != features.len() {
        return Err(Error::LengthMismatch {
            left: attributions.len(),
            right: features.len(),
        });
    }
    if attributions.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let n = attributions.len() as f64;
    let mut out: Vec<FeatureSummary> = (0..N_FEATURES)
        .map(|j| {
            let col: Vec<f64> = features.iter().map(|f| f.0[j]).collect();
            let mean = col.iter().sum::<f64>() / n;
            let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            let points = attributions
                .iter()
                .zip(&col)
                .map(|(a, v)| SummaryPoint {
                    instance_id: a.instance_id.clone(),
                    phi: a.phi[j],
                    value_std: if sd > 0.0 { (v - mean) / sd } else { 0.0 },
                })
                .collect();
            FeatureSummary {
                name: FEATURE_NAMES[j].to_string(),
                index: j,
                mean_abs_phi: attributions.iter().map(|a| a.phi[j].abs()).sum::<f64>() / n,
                points,
            }
        })
        .collect();
    out.sort_by(|a, b| b.mean_abs_phi.total_cmp(&a.mean_abs_phi).then(a.index.cmp(&b.index)));
    Ok(SummaryData { features: out })
}

pub fn attribution_csv_header() -> String {
    let mut h = String::from("id,base_value,fx");
    for name in FEATURE_NAMES {
        h.push_str(",phi_");
        h.push_str(name);
    }
    h
}

pub fn write_attribution_csv(attributions: &[Attribution]) -> String {
    let mut out = attribution_csv_header();
    out.push('\n');
    for a in attributions {
        let _ = write!(out, "{},{},{}", a.instance_id, a.base_value, a.fx);
        for p in a.phi {
            let _ = write!(out, ",{p}");
        }
        out.push('\n');
    }
    out
}
