//! k-nearest neighbours on standardized features.

use serde::{Deserialize, Serialize};

use crate::features::N_FEATURES;

use super::coalition::{masked_seq_sums, seq_sum, N_COALITIONS};
use super::standardize::Row;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self { k: 5 }
    }
}

/// Stores the training set; the score is the fraction of Good among the `k`
/// nearest rows, ordered by `(squared distance, row index)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub rows: Vec<Row>,
    pub good: Vec<bool>,
}

impl Knn {
    pub fn fit(x: &[Row], y: &[f64], params: &KnnParams) -> Self {
        Knn {
            k: params.k.clamp(1, x.len().max(1)),
            rows: x.to_vec(),
            good: y.iter().map(|&v| v > 0.5).collect(),
        }
    }

    fn sq_dist(a: &Row, b: &Row) -> f64 {
        seq_sum((0..N_FEATURES).map(|j| {
            let d = a[j] - b[j];
            d * d
        }))
    }

    pub fn score(&self, z: &Row) -> f64 {
        let mut keyed: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (Self::sq_dist(r, z), i))
            .collect();
        let k = self.k.min(keyed.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < keyed.len() {
            keyed.select_nth_unstable_by(k - 1, cmp);
        }
        let goods = keyed[..k].iter().filter(|(_, i)| self.good[*i]).count();
        goods as f64 / k as f64
    }

    /// Neighbour sets for all coalitions at once. Rows are visited in order of
    /// a lower bound on their distance over every coalition (the sum of the
    /// per-feature minima, which the rounded sums can never undercut), and the
    /// scan stops once that bound exceeds every current k-th distance. Keys
    /// are `(distance, row index)`, so the result matches [`score`](Self::score) exactly.
    pub fn coalition_scores(&self, x: &Row, b: &Row, out: &mut [f64]) {
        let k = self.k.min(self.rows.len());
        let sq = |r: &Row, z: &Row| -> Row {
            std::array::from_fn(|j| {
                let d = r[j] - z[j];
                d * d
            })
        };
        let mut order: Vec<(f64, u32)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let (dx, db) = (sq(r, x), sq(r, b));
                (seq_sum((0..N_FEATURES).map(|j| dx[j].min(db[j]))), i as u32)
            })
            .collect();
        order.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));

        const NONE: (f64, u32) = (f64::INFINITY, u32::MAX);
        let mut kept = vec![NONE; N_COALITIONS * k];
        let mut kth = vec![NONE; N_COALITIONS];
        let mut bound = f64::INFINITY;
        let mut d2 = vec![0.0; N_COALITIONS];
        for (step, &(lower, idx)) in order.iter().enumerate() {
            if lower > bound {
                break;
            }
            let r = &self.rows[idx as usize];
            masked_seq_sums(&sq(r, x), &sq(r, b), &mut d2);
            for (s, &d) in d2.iter().enumerate() {
                let (td, ti) = kth[s];
                if d > td || (d == td && idx > ti) {
                    continue;
                }
                let slot = &mut kept[s * k..(s + 1) * k];
                let mut pos = k - 1;
                while pos > 0 && (slot[pos - 1].0 > d || (slot[pos - 1].0 == d && slot[pos - 1].1 > idx)) {
                    slot[pos] = slot[pos - 1];
                    pos -= 1;
                }
                slot[pos] = (d, idx);
                kth[s] = slot[k - 1];
            }
            if step % 8 == 7 {
                bound = kth.iter().fold(0.0, |m, t| m.max(t.0));
            }
        }
        for (s, o) in out.iter_mut().enumerate() {
            let goods = kept[s * k..(s + 1) * k]
                .iter()
                .filter(|(_, i)| self.good[*i as usize])
                .count();
            *o = goods as f64 / k as f64;
        }
    }

    pub(crate) fn is_well_formed(&self) -> bool {
        self.k >= 1 && self.k <= self.rows.len() && self.rows.len() == self.good.len()
    }
}
