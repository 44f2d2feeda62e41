use serde::{Deserialize, Serialize};

use crate::features::{FeatureVector, N_FEATURES};

pub type Row = [f64; N_FEATURES];

pub const STD_FLOOR: f64 = 1e-12;

/// Per-feature z-scoring fitted on the training rows (population std, floored).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl StandardizationStats {
    pub fn fit(rows: &[FeatureVector]) -> Self {
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; N_FEATURES];
        let mut std = vec![0.0; N_FEATURES];
        for j in 0..N_FEATURES {
            let m = rows.iter().map(|r| r.0[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r.0[j] - m).powi(2)).sum::<f64>() / n;
            mean[j] = m;
            std[j] = var.sqrt().max(STD_FLOOR);
        }
        Self { mean, std }
    }

    pub fn identity() -> Self {
        Self {
            mean: vec![0.0; N_FEATURES],
            std: vec![1.0; N_FEATURES],
        }
    }

    pub fn apply(&self, x: &FeatureVector) -> Row {
        let mut z = [0.0; N_FEATURES];
        for j in 0..N_FEATURES {
            z[j] = (x.0[j] - self.mean[j]) / self.std[j];
        }
        z
    }

    pub(crate) fn is_well_formed(&self) -> bool {
        self.mean.len() == N_FEATURES
            && self.std.len() == N_FEATURES
            && self.std.iter().all(|s| *s >= STD_FLOOR)
            && self.mean.iter().all(|m| m.is_finite())
    }
}
