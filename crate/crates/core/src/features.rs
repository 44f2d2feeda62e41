//! The 14 per-cloud geometric statistics and the feature CSV format.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::QualityLabel;
use crate::error::{Error, Result};
use crate::mesh_io::PointCloud;

pub const N_FEATURES: usize = 14;

/// Canonical feature order. Model files and CSV headers rely on it.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "min_x",
    "min_y",
    "min_z",
    "max_x",
    "max_y",
    "max_z",
    "mean_x",
    "mean_y",
    "mean_z",
    "std_x",
    "std_y",
    "std_z",
    "mean_radius",
    "std_radius",
];

pub const MIN_Z: usize = 2;

pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|n| *n == name)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub [f64; N_FEATURES]);

impl FeatureVector {
    pub fn values(&self) -> &[f64; N_FEATURES] {
        &self.0
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        feature_index(name).map(|i| self.0[i])
    }

    pub fn min(&self) -> [f64; 3] {
        [self.0[0], self.0[1], self.0[2]]
    }

    pub fn max(&self) -> [f64; 3] {
        [self.0[3], self.0[4], self.0[5]]
    }

    pub fn mean(&self) -> [f64; 3] {
        [self.0[6], self.0[7], self.0[8]]
    }

    pub fn std(&self) -> [f64; 3] {
        [self.0[9], self.0[10], self.0[11]]
    }

    pub fn mean_radius(&self) -> f64 {
        self.0[12]
    }

    pub fn std_radius(&self) -> f64 {
        self.0[13]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl From<[f64; N_FEATURES]> for FeatureVector {
    fn from(v: [f64; N_FEATURES]) -> Self {
        FeatureVector(v)
    }
}

/// Neumaier-compensated running sum.
#[derive(Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn mean_and_std(values: impl Iterator<Item = f64> + Clone, n: f64) -> (f64, f64) {
    let mut s = CompensatedSum::default();
    values.clone().for_each(|v| s.add(v));
    let mean = s.value() / n;
    let mut sq = CompensatedSum::default();
    values.for_each(|v| {
        let d = v - mean;
        sq.add(d * d);
    });
    (mean, (sq.value() / n).sqrt())
}

/// Per-axis min/max/mean/population std plus mean and std of the distance
/// to the origin. Sums are compensated so the result does not depend on
/// point order beyond rounding of the final value.
pub fn extract_features(cloud: &PointCloud) -> Result<FeatureVector> {
    let pts = cloud.points();
    if pts.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let n = pts.len() as f64;
    let mut out = [0.0; N_FEATURES];
    for axis in 0..3 {
        let (lo, hi) = pts
            .iter()
            .map(|p| p[axis])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        let (mean, std) = mean_and_std(pts.iter().map(move |p| p[axis]), n);
        out[axis] = lo;
        out[3 + axis] = hi;
        // rounding can push the mean of nearly constant data past an extreme
        out[6 + axis] = mean.clamp(lo, hi);
        out[9 + axis] = std;
    }
    let radius = pts
        .iter()
        .map(|p| (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt());
    let (mr, sr) = mean_and_std(radius, n);
    out[12] = mr;
    out[13] = sr;
    Ok(FeatureVector(out))
}

/// One row of a feature table; `label` is absent for unlabeled sets.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub id: String,
    pub label: Option<QualityLabel>,
    pub features: FeatureVector,
}

pub fn feature_csv_header() -> String {
    let mut h = String::from("id,label");
    for name in FEATURE_NAMES {
        h.push(',');
        h.push_str(name);
    }
    h
}

pub fn write_feature_csv(rows: &[FeatureRow]) -> String {
    let mut out = feature_csv_header();
    out.push('\n');
    for row in rows {
        out.push_str(&row.id);
        out.push(',');
        if let Some(l) = row.label {
            out.push_str(l.as_str());
        }
        for v in row.features.0 {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

pub fn parse_feature_csv(text: &str) -> Result<Vec<FeatureRow>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let id_col = cols
        .iter()
        .position(|c| *c == "id")
        .ok_or_else(|| Error::parse(1, "header lacks `id`"))?;
    let label_col = cols.iter().position(|c| *c == "label");
    let mut feat_cols = [0usize; N_FEATURES];
    for (slot, name) in feat_cols.iter_mut().zip(FEATURE_NAMES) {
        *slot = cols
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::parse(1, format!("header lacks `{name}`")))?;
    }
    let mut rows = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != cols.len() {
            return Err(Error::parse(
                line,
                format!("expected {} fields, found {}", cols.len(), fields.len()),
            ));
        }
        let label = match label_col.map(|c| fields[c]) {
            None | Some("") => None,
            Some(s) => Some(
                s.parse::<QualityLabel>()
                    .map_err(|_| Error::parse(line, format!("bad label {s:?}")))?,
            ),
        };
        let mut v = [0.0; N_FEATURES];
        for (slot, &c) in v.iter_mut().zip(&feat_cols) {
            let tok = fields[c];
            *slot = tok
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::parse(line, format!("bad feature value {tok:?}")))?;
        }
        rows.push(FeatureRow {
            id: fields[id_col].to_string(),
            label,
            features: FeatureVector(v),
        });
    }
    Ok(rows)
}

pub fn load_feature_csv(path: &Path) -> Result<Vec<FeatureRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_feature_csv(&text)
}

pub fn save_feature_csv(rows: &[FeatureRow], path: &Path) -> Result<()> {
    fs::write(path, write_feature_csv(rows)).map_err(|e| Error::io(path, e))
}
