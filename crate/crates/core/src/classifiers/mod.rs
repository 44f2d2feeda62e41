//! Ten classical binary classifiers behind one fit/predict interface.
//!
//! Every model z-scores its inputs with statistics fitted on the training
//! rows, then scores the standardized row. The score is the model's estimate
//! of P(Good); the label is Good only when the score is strictly above 0.5.

pub mod boosting;
pub mod coalition;
pub mod forest;
pub mod knn;
pub mod linear;
pub mod mlp;
pub mod standardize;
pub mod svm;
pub mod tree;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::QualityLabel;
use crate::error::{Error, Result};
use crate::features::{FeatureVector, FEATURE_NAMES, N_FEATURES};

pub use boosting::{AdaBoost, AdaBoostParams, GradientBoosting, GradientBoostingParams};
pub use forest::{Forest, ForestParams};
pub use knn::{Knn, KnnParams};
pub use linear::{LdaParams, LinearModel, LogisticParams};
pub use mlp::{Mlp, MlpParams};
pub use standardize::{Row, StandardizationStats, STD_FLOOR};
pub use svm::{Svm, SvmParams};
pub use tree::{GrowParams, Splitter, Tree};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Svm,
    DecisionTree,
    Adaboost,
    RandomForest,
    ExtraTrees,
    GradientBoosting,
    Mlp,
    Knn,
    LogisticRegression,
    Lda,
}

impl ModelKind {
    pub const ALL: [ModelKind; 10] = [
        ModelKind::Svm,
        ModelKind::DecisionTree,
        ModelKind::Adaboost,
        ModelKind::RandomForest,
        ModelKind::ExtraTrees,
        ModelKind::GradientBoosting,
        ModelKind::Mlp,
        ModelKind::Knn,
        ModelKind::LogisticRegression,
        ModelKind::Lda,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Svm => "svm",
            ModelKind::DecisionTree => "decision_tree",
            ModelKind::Adaboost => "adaboost",
            ModelKind::RandomForest => "random_forest",
            ModelKind::ExtraTrees => "extra_trees",
            ModelKind::GradientBoosting => "gradient_boosting",
            ModelKind::Mlp => "mlp",
            ModelKind::Knn => "knn",
            ModelKind::LogisticRegression => "logistic_regression",
            ModelKind::Lda => "lda",
        }
    }

    /// Kinds whose label is invariant under strictly increasing per-feature maps.
    pub fn is_tree_based(self) -> bool {
        matches!(
            self,
            ModelKind::DecisionTree
                | ModelKind::Adaboost
                | ModelKind::RandomForest
                | ModelKind::ExtraTrees
                | ModelKind::GradientBoosting
        )
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == key)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown model kind `{s}`")))
    }
}

/// Every tunable constant of every kind, with library-style defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Hyperparameters {
    pub decision_tree: GrowParams,
    pub forest: ForestParams,
    pub adaboost: AdaBoostParams,
    pub gradient_boosting: GradientBoostingParams,
    pub logistic: LogisticParams,
    pub lda: LdaParams,
    pub svm: SvmParams,
    pub knn: KnnParams,
    pub mlp: MlpParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelParams {
    /// Fallback for single-class training data.
    Constant { label: QualityLabel },
    Svm(Svm),
    DecisionTree(Tree),
    Adaboost(AdaBoost),
    Forest(Forest),
    GradientBoosting(GradientBoosting),
    Mlp(Mlp),
    Knn(Knn),
    Linear(LinearModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub version: u32,
    pub kind: ModelKind,
    pub seed: u64,
    pub degenerate: bool,
    pub feature_names: Vec<String>,
    pub standardization: StandardizationStats,
    pub hyperparameters: Hyperparameters,
    pub parameters: ModelParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: QualityLabel,
    pub score: f64,
}

impl Prediction {
    pub fn from_score(score: f64) -> Self {
        Prediction {
            label: label_for_score(score),
            score,
        }
    }
}

/// Good only when `score > 0.5`; an exact tie goes to Bad.
pub fn label_for_score(score: f64) -> QualityLabel {
    QualityLabel::from_bool(score > 0.5)
}

/// Trains one model. A training set holding a single class yields a constant
/// predictor flagged `degenerate` rather than an error.
pub fn fit(
    kind: ModelKind,
    rows: &[(FeatureVector, QualityLabel)],
    hyper: &Hyperparameters,
    seed: u64,
) -> Result<TrainedModel> {
    if rows.is_empty() {
        return Err(Error::EmptyTraining);
    }
    if let Some(bad) = rows.iter().position(|(x, _)| !x.is_finite()) {
        return Err(Error::InvalidSpec(format!("training row {bad} has a non-finite feature")));
    }
    let feats: Vec<FeatureVector> = rows.iter().map(|(x, _)| *x).collect();
    let standardization = StandardizationStats::fit(&feats);
    let x: Vec<Row> = feats.iter().map(|f| standardization.apply(f)).collect();
    let y: Vec<f64> = rows.iter().map(|(_, l)| l.as_f64()).collect();

    let first = rows[0].1;
    let degenerate = rows.iter().all(|(_, l)| *l == first);
    let parameters = if degenerate {
        log::warn!("{kind}: single-class training data, fitting a constant {first} predictor");
        ModelParams::Constant { label: first }
    } else {
        match kind {
            ModelKind::Svm => ModelParams::Svm(Svm::fit(&x, &y, &hyper.svm, seed)),
            ModelKind::DecisionTree => {
                ModelParams::DecisionTree(forest::fit_decision_tree(&x, &y, hyper.decision_tree, seed))
            }
            ModelKind::Adaboost => ModelParams::Adaboost(AdaBoost::fit(&x, &y, &hyper.adaboost, seed)),
            ModelKind::RandomForest => {
                ModelParams::Forest(Forest::fit_random_forest(&x, &y, &hyper.forest, seed))
            }
            ModelKind::ExtraTrees => ModelParams::Forest(Forest::fit_extra_trees(&x, &y, &hyper.forest, seed)),
            ModelKind::GradientBoosting => {
                ModelParams::GradientBoosting(GradientBoosting::fit(&x, &y, &hyper.gradient_boosting, seed))
            }
            ModelKind::Mlp => ModelParams::Mlp(Mlp::fit(&x, &y, &hyper.mlp, seed)),
            ModelKind::Knn => ModelParams::Knn(Knn::fit(&x, &y, &hyper.knn)),
            ModelKind::LogisticRegression => ModelParams::Linear(linear::fit_logistic(&x, &y, &hyper.logistic)),
            ModelKind::Lda => ModelParams::Linear(linear::fit_lda(&x, &y, &hyper.lda)),
        }
    };
    Ok(TrainedModel {
        version: MODEL_VERSION,
        kind,
        seed,
        degenerate,
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        standardization,
        hyperparameters: hyper.clone(),
        parameters,
    })
}

impl TrainedModel {
    pub fn standardize(&self, x: &FeatureVector) -> Row {
        self.standardization.apply(x)
    }

    /// P(Good) for an already standardized row.
    pub fn score_standardized(&self, z: &Row) -> f64 {
        match &self.parameters {
            ModelParams::Constant { label } => label.as_f64(),
            ModelParams::Svm(m) => m.score(z),
            ModelParams::DecisionTree(t) => t.predict(z),
            ModelParams::Adaboost(m) => m.score(z),
            ModelParams::Forest(m) => m.score(z),
            ModelParams::GradientBoosting(m) => m.score(z),
            ModelParams::Mlp(m) => m.score(z),
            ModelParams::Knn(m) => m.score(z),
            ModelParams::Linear(m) => m.score(z),
        }
    }

    pub fn score(&self, x: &FeatureVector) -> f64 {
        self.score_standardized(&self.standardize(x))
    }

    /// Scores of all 2^14 composites of standardized rows `x` and `b`
    /// (bit `j` set: feature `j` from `x`), written into `out`.
    /// Bit-identical to calling [`score_standardized`](Self::score_standardized) on each
    /// composite for every kind except the SVM, which agrees to rounding.
    pub fn coalition_scores(&self, x: &Row, b: &Row, out: &mut [f64]) {
        assert_eq!(out.len(), coalition::N_COALITIONS);
        match &self.parameters {
            ModelParams::Constant { label } => out.fill(label.as_f64()),
            ModelParams::Svm(m) => m.coalition_scores(x, b, out),
            ModelParams::DecisionTree(t) => {
                out.fill(0.0);
                coalition::accumulate_tree(t, x, b, &|v| v, out);
            }
            ModelParams::Adaboost(m) => m.coalition_scores(x, b, out),
            ModelParams::Forest(m) => m.coalition_scores(x, b, out),
            ModelParams::GradientBoosting(m) => m.coalition_scores(x, b, out),
            ModelParams::Mlp(m) => m.coalition_scores(x, b, out),
            ModelParams::Knn(m) => m.coalition_scores(x, b, out),
            ModelParams::Linear(m) => m.coalition_scores(x, b, out),
        }
    }

    /// Bitmask of features that can influence the score, when the model makes that knowable.
    pub fn used_features(&self) -> Option<u32> {
        match &self.parameters {
            ModelParams::Constant { .. } => Some(0),
            ModelParams::DecisionTree(t) => Some(t.used_features()),
            ModelParams::Forest(f) => Some(f.used_features()),
            ModelParams::Adaboost(a) => Some(a.stumps.iter().fold(0, |m, t| m | t.used_features())),
            ModelParams::GradientBoosting(g) => Some(g.trees.iter().fold(0, |m, t| m | t.used_features())),
            _ => None,
        }
    }

    fn check(&self) -> Result<()> {
        if self.version != MODEL_VERSION {
            return Err(Error::SchemaMismatch {
                expected: MODEL_VERSION,
                found: self.version.to_string(),
            });
        }
        let names_ok = self.feature_names.len() == N_FEATURES
            && self.feature_names.iter().zip(FEATURE_NAMES).all(|(a, b)| a == b);
        if !names_ok {
            return Err(Error::InvalidSpec("model feature names differ from the canonical order".into()));
        }
        let params_ok = match &self.parameters {
            ModelParams::Constant { .. } => true,
            ModelParams::Svm(m) => m.is_well_formed(),
            ModelParams::DecisionTree(t) => t.is_well_formed(),
            ModelParams::Adaboost(m) => m.is_well_formed(),
            ModelParams::Forest(m) => m.is_well_formed(),
            ModelParams::GradientBoosting(m) => m.is_well_formed(),
            ModelParams::Mlp(m) => m.is_well_formed(),
            ModelParams::Knn(m) => m.is_well_formed(),
            ModelParams::Linear(m) => m.is_well_formed(),
        };
        if !params_ok || !self.standardization.is_well_formed() {
            return Err(Error::InvalidSpec(format!("malformed {} parameters", self.kind)));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        // check the version before the full decode so old files report a schema error
        let raw: serde_json::Value = serde_json::from_str(text)?;
        match raw.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == MODEL_VERSION as u64 => {}
            other => {
                return Err(Error::SchemaMismatch {
                    expected: MODEL_VERSION,
                    found: other.map_or_else(
                        || raw.get("version").map_or("missing".into(), |v| v.to_string()),
                        |v| v.to_string(),
                    ),
                })
            }
        }
        let model: TrainedModel = serde_json::from_value(raw)?;
        model.check()?;
        Ok(model)
    }
}

pub fn predict(model: &TrainedModel, x: &FeatureVector) -> Prediction {
    Prediction::from_score(model.score(x))
}

pub fn predict_batch(model: &TrainedModel, xs: &[FeatureVector]) -> Vec<Prediction> {
    xs.par_iter().map(|x| predict(model, x)).collect()
}

pub fn save_model(model: &TrainedModel, path: &Path) -> Result<()> {
    std::fs::write(path, model.to_json()?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    TrainedModel::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng as _;

    fn fv(vals: &[(usize, f64)]) -> FeatureVector {
        let mut v = [0.0; N_FEATURES];
        for &(j, x) in vals {
            v[j] = x;
        }
        FeatureVector(v)
    }

    fn blobs(n: usize, seed: u64) -> Vec<(FeatureVector, QualityLabel)> {
        let mut rng = rng_from_seed(seed);
        (0..n)
            .map(|i| {
                let good = i % 2 == 0;
                let shift = if good { 2.0 } else { -2.0 };
                let v: [f64; N_FEATURES] = std::array::from_fn(|_| shift + rng.random_range(-1.0..1.0));
                (FeatureVector(v), QualityLabel::from_bool(good))
            })
            .collect()
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ModelKind::ALL {
            assert_eq!(k.as_str().parse::<ModelKind>().unwrap(), k);
        }
        assert!("pointnet".parse::<ModelKind>().is_err());
    }

    #[test]
    fn xor_tree_fits_training_data() {
        let rows = vec![
            (fv(&[(0, 0.0), (1, 0.0)]), QualityLabel::Bad),
            (fv(&[(0, 1.0), (1, 1.0)]), QualityLabel::Bad),
            (fv(&[(0, 0.0), (1, 1.0)]), QualityLabel::Good),
            (fv(&[(0, 1.0), (1, 0.0)]), QualityLabel::Good),
        ];
        let m = fit(ModelKind::DecisionTree, &rows, &Hyperparameters::default(), 1).unwrap();
        for (x, l) in &rows {
            assert_eq!(predict(&m, x).label, *l);
        }
    }

    #[test]
    fn every_kind_separates_blobs() {
        let rows = blobs(60, 3);
        let mut hyper = Hyperparameters::default();
        hyper.mlp.epochs = 30;
        for k in ModelKind::ALL {
            let m = fit(k, &rows, &hyper, 9).unwrap();
            let hits = rows.iter().filter(|(x, l)| predict(&m, x).label == *l).count();
            assert!(hits >= 57, "{k}: {hits}/60");
        }
    }

    #[test]
    fn single_class_gives_constant_model() {
        let rows: Vec<_> = blobs(10, 1).into_iter().map(|(x, _)| (x, QualityLabel::Good)).collect();
        for k in ModelKind::ALL {
            let m = fit(k, &rows, &Hyperparameters::default(), 0).unwrap();
            assert!(m.degenerate);
            let p = predict(&m, &fv(&[(3, 100.0)]));
            assert_eq!((p.label, p.score), (QualityLabel::Good, 1.0));
        }
        assert!(matches!(
            fit(ModelKind::Knn, &[], &Hyperparameters::default(), 0),
            Err(Error::EmptyTraining)
        ));
    }

    #[test]
    fn tie_score_is_bad() {
        assert_eq!(label_for_score(0.5), QualityLabel::Bad);
        assert_eq!(label_for_score(0.5f64.next_up()), QualityLabel::Good);
    }

    #[test]
    fn json_round_trip_and_version_check() {
        let rows = blobs(40, 5);
        let m = fit(ModelKind::RandomForest, &rows, &Hyperparameters::default(), 2).unwrap();
        let text = m.to_json().unwrap();
        let back = TrainedModel::from_json(&text).unwrap();
        assert_eq!(back, m);

        let mut raw: serde_json::Value = serde_json::from_str(&text).unwrap();
        raw["version"] = 7.into();
        assert!(matches!(
            TrainedModel::from_json(&raw.to_string()),
            Err(Error::SchemaMismatch { .. })
        ));
        assert!(matches!(TrainedModel::from_json(&text[..text.len() / 2]), Err(Error::Json(_))));
    }

    #[test]
    fn coalition_scores_match_composites() {
        let rows = blobs(40, 8);
        let mut hyper = Hyperparameters::default();
        hyper.mlp.epochs = 5;
        hyper.forest.n_trees = 10;
        let x = rows[0].0;
        let b = rows[1].0;
        let mut out = vec![0.0; coalition::N_COALITIONS];
        for k in ModelKind::ALL {
            let m = fit(k, &rows, &hyper, 4).unwrap();
            let (zx, zb) = (m.standardize(&x), m.standardize(&b));
            m.coalition_scores(&zx, &zb, &mut out);
            for mask in (0..coalition::N_COALITIONS).step_by(97).chain([coalition::N_COALITIONS - 1]) {
                let direct = m.score_standardized(&coalition::composite(&zx, &zb, mask));
                if k == ModelKind::Svm {
                    assert!((out[mask] - direct).abs() <= 1e-12 * direct.abs(), "{k} mask {mask}");
                } else {
                    assert_eq!(out[mask].to_bits(), direct.to_bits(), "{k} mask {mask}");
                }
            }
        }
    }
}
