//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use shapeqc::features::N_FEATURES;

/// Features by a second path: single-pass Welford moments for the coordinates
/// and for the distance to the origin.
pub fn features_oracle(points: &[[f64; 3]]) -> [f64; N_FEATURES] {
    let mut min = [f64::INFINITY; 3];
    let mut max = [f64::NEG_INFINITY; 3];
    let mut mean = [0.0f64; 3];
    let mut m2 = [0.0f64; 3];
    for (k, p) in points.iter().enumerate() {
        let n = (k + 1) as f64;
        for a in 0..3 {
            min[a] = min[a].min(p[a]);
            max[a] = max[a].max(p[a]);
            let d = p[a] - mean[a];
            mean[a] += d / n;
            m2[a] += d * (p[a] - mean[a]);
        }
    }
    let n = points.len() as f64;
    let std = m2.map(|s| (s / n).max(0.0).sqrt());
    let (mut rm, mut rm2) = (0.0f64, 0.0f64);
    for (k, p) in points.iter().enumerate() {
        let r = p[0].hypot(p[1]).hypot(p[2]);
        let d = r - rm;
        rm += d / (k + 1) as f64;
        rm2 += d * (r - rm);
    }
    [
        min[0],
        min[1],
        min[2],
        max[0],
        max[1],
        max[2],
        mean[0],
        mean[1],
        mean[2],
        std[0],
        std[1],
        std[2],
        rm,
        (rm2 / n).max(0.0).sqrt(),
    ]
}

/// Relative error with an absolute floor tied to the cloud's coordinate scale,
/// so that values which are zero in exact arithmetic compare sensibly.
pub fn rel_err(got: f64, want: f64, scale: f64) -> f64 {
    (got - want).abs() / want.abs().max(scale * 1e-6).max(f64::MIN_POSITIVE)
}

/// Barycentric coordinates of `p` in triangle `(a, b, c)` by the normal-equation
/// (Cramer) formula, plus the distance from `p` to the triangle's plane.
pub fn barycentric(p: [f64; 3], a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> ([f64; 3], f64) {
    let sub = |x: [f64; 3], y: [f64; 3]| [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
    let dot = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    let (v0, v1, v2) = (sub(b, a), sub(c, a), sub(p, a));
    let (d00, d01, d11, d20, d21) = (dot(v0, v0), dot(v0, v1), dot(v1, v1), dot(v2, v0), dot(v2, v1));
    let den = d00 * d11 - d01 * d01;
    let v = (d11 * d20 - d01 * d21) / den;
    let w = (d00 * d21 - d01 * d20) / den;
    let u = 1.0 - v - w;
    let n = [
        v0[1] * v1[2] - v0[2] * v1[1],
        v0[2] * v1[0] - v0[0] * v1[2],
        v0[0] * v1[1] - v0[1] * v1[0],
    ];
    let dist = dot(v2, n).abs() / dot(n, n).sqrt();
    ([u, v, w], dist)
}

/// Brute-force Shapley values by direct subset enumeration with the
/// interventional value function, evaluated point by point.
pub fn shapley_brute(score: impl Fn(&[f64; N_FEATURES]) -> f64, x: &[f64; N_FEATURES], bg: &[[f64; N_FEATURES]]) -> [f64; N_FEATURES] {
    let d = N_FEATURES;
    let value = |mask: usize| {
        bg.iter()
            .map(|b| {
                let z: [f64; N_FEATURES] = std::array::from_fn(|j| if mask >> j & 1 == 1 { x[j] } else { b[j] });
                score(&z)
            })
            .sum::<f64>()
            / bg.len() as f64
    };
    let v: Vec<f64> = (0..1usize << d).map(value).collect();
    let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
    std::array::from_fn(|i| {
        (0..1usize << d)
            .filter(|s| s >> i & 1 == 0)
            .map(|s| {
                let k = (s as u32).count_ones() as usize;
                fact(k) * fact(d - k - 1) / fact(d) * (v[s | 1 << i] - v[s])
            })
            .sum()
    })
}
