//! Helpers that evaluate a model on every feature coalition at once.
//!
//! For an instance `x` and a background row `b`, coalition `S` (a bitmask
//! over the 14 features) denotes the composite input that takes feature `j`
//! from `x` when bit `j` is set and from `b` otherwise. The sum helpers
//! reproduce the floating-point operation order of the single-input predict
//! paths, so a table built from them agrees bit for bit with scoring each
//! composite one at a time.

use crate::features::N_FEATURES;

use super::tree::{Node, Tree};

pub const N_COALITIONS: usize = 1 << N_FEATURES;

/// Left-to-right sum `0.0 + t[0] + t[1] + ...`.
#[inline]
pub fn seq_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = 0.0;
    for t in terms {
        s += t;
    }
    s
}

/// `out[S]` = left-to-right sum over `j` of `with[j]` if bit `j` of `S` is set, else `without[j]`.
pub fn masked_seq_sums(with: &[f64; N_FEATURES], without: &[f64; N_FEATURES], out: &mut [f64]) {
    debug_assert_eq!(out.len(), N_COALITIONS);
    out[0] = 0.0;
    for j in 0..N_FEATURES {
        let half = 1usize << j;
        let (lo, hi) = out.split_at_mut(half);
        for (m, slot) in lo.iter_mut().enumerate() {
            let base = *slot;
            hi[m] = base + with[j];
            *slot = base + without[j];
        }
    }
}

/// `out[S]` = `init * f[0] * f[1] * ...` (left to right) with `f[j] = with[j]`
/// if bit `j` of `S` is set, else `without[j]`.
pub fn masked_products(init: f64, with: &[f64; N_FEATURES], without: &[f64; N_FEATURES], out: &mut [f64]) {
    debug_assert_eq!(out.len(), N_COALITIONS);
    out[0] = init;
    for j in 0..N_FEATURES {
        let half = 1usize << j;
        let (lo, hi) = out.split_at_mut(half);
        for (m, slot) in lo.iter_mut().enumerate() {
            let base = *slot;
            hi[m] = base * with[j];
            *slot = base * without[j];
        }
    }
}

/// Adds `leaf(value)` to `acc[S]` for every coalition, where `value` is the
/// leaf the composite input for `S` reaches.
pub fn accumulate_tree(
    tree: &Tree,
    x: &[f64; N_FEATURES],
    b: &[f64; N_FEATURES],
    leaf: &impl Fn(f64) -> f64,
    acc: &mut [f64],
) {
    walk(tree, 0, x, b, 0, 0, leaf, acc);
}

#[allow(clippy::too_many_arguments)]
fn walk(
    tree: &Tree,
    node: usize,
    x: &[f64; N_FEATURES],
    b: &[f64; N_FEATURES],
    from_x: usize,
    from_b: usize,
    leaf: &impl Fn(f64) -> f64,
    acc: &mut [f64],
) {
    match tree.nodes()[node] {
        Node::Leaf { value } => {
            let v = leaf(value);
            let free = (N_COALITIONS - 1) & !(from_x | from_b);
            let mut sub = free;
            loop {
                acc[from_x | sub] += v;
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & free;
            }
        }
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            let bit = 1usize << feature;
            let child = |go_left: bool| if go_left { left as usize } else { right as usize };
            let x_left = x[feature] <= threshold;
            let b_left = b[feature] <= threshold;
            if from_x & bit != 0 {
                walk(tree, child(x_left), x, b, from_x, from_b, leaf, acc);
            } else if from_b & bit != 0 || x_left == b_left {
                walk(tree, child(b_left), x, b, from_x, from_b, leaf, acc);
            } else {
                walk(tree, child(x_left), x, b, from_x | bit, from_b, leaf, acc);
                walk(tree, child(b_left), x, b, from_x, from_b | bit, leaf, acc);
            }
        }
    }
}

/// Composite input for coalition `mask`.
pub fn composite(x: &[f64; N_FEATURES], b: &[f64; N_FEATURES], mask: usize) -> [f64; N_FEATURES] {
    let mut z = *b;
    for j in 0..N_FEATURES {
        if mask & (1 << j) != 0 {
            z[j] = x[j];
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masked_sums_match_direct_order() {
        let with: [f64; N_FEATURES] = std::array::from_fn(|j| 0.1 * (j as f64 + 1.0).sqrt());
        let without: [f64; N_FEATURES] = std::array::from_fn(|j| -1.0 / (j as f64 + 3.0));
        let mut out = vec![0.0; N_COALITIONS];
        masked_seq_sums(&with, &without, &mut out);
        for mask in [0usize, 1, 5, 777, 12345, N_COALITIONS - 1] {
            let direct = seq_sum(
                (0..N_FEATURES).map(|j| if mask & (1 << j) != 0 { with[j] } else { without[j] }),
            );
            assert_eq!(out[mask].to_bits(), direct.to_bits());
        }
    }
}
