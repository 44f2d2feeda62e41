//! Accuracy, macro F1, Good/Bad prediction rates and Cohen's kappa, plus the
//! per-model agreement report.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::QualityLabel;
use crate::error::{Error, Result};

/// Counts indexed reference x prediction: `n_gb` = reference Good, predicted Bad.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub n_gg: u64,
    pub n_gb: u64,
    pub n_bg: u64,
    pub n_bb: u64,
}

impl ConfusionMatrix {
    pub fn from_labels(reference: &[QualityLabel], predicted: &[QualityLabel]) -> Result<Self> {
        check_pair(reference, predicted)?;
        let mut cm = ConfusionMatrix::default();
        for (r, p) in reference.iter().zip(predicted) {
            match (r, p) {
                (QualityLabel::Good, QualityLabel::Good) => cm.n_gg += 1,
                (QualityLabel::Good, QualityLabel::Bad) => cm.n_gb += 1,
                (QualityLabel::Bad, QualityLabel::Good) => cm.n_bg += 1,
                (QualityLabel::Bad, QualityLabel::Bad) => cm.n_bb += 1,
            }
        }
        Ok(cm)
    }

    pub fn total(&self) -> u64 {
        self.n_gg + self.n_gb + self.n_bg + self.n_bb
    }

    fn nonempty(&self) -> Result<f64> {
        match self.total() {
            0 => Err(Error::EmptyEvaluation),
            n => Ok(n as f64),
        }
    }

    /// Per-class F1 as `(good, bad)`; a class with `P + R = 0` scores 0.
    pub fn f1_per_class(&self) -> Result<(f64, f64)> {
        self.nonempty()?;
        Ok((
            f1_from_counts(self.n_gg, self.n_bg, self.n_gb),
            f1_from_counts(self.n_bb, self.n_gb, self.n_bg),
        ))
    }
}

fn f1_from_counts(tp: u64, fp: u64, fn_: u64) -> f64 {
    // 2PR/(P+R) = 2tp / (2tp + fp + fn), and 0 when tp = 0
    if tp == 0 {
        0.0
    } else {
        (2 * tp) as f64 / (2 * tp + fp + fn_) as f64
    }
}

fn check_pair(a: &[QualityLabel], b: &[QualityLabel]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    Ok(())
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let n = cm.nonempty()?;
    Ok((cm.n_gg + cm.n_bb) as f64 / n)
}

pub fn f1_macro(cm: &ConfusionMatrix) -> Result<f64> {
    let (g, b) = cm.f1_per_class()?;
    Ok((g + b) / 2.0)
}

/// `(p_o - p_e) / (1 - p_e)`, computed from integer counts so that the
/// constant-rater cases come out exactly 0. Returns 1 when `p_e = 1`.
pub fn cohens_kappa(reference: &[QualityLabel], predicted: &[QualityLabel]) -> Result<f64> {
    let cm = ConfusionMatrix::from_labels(reference, predicted)?;
    Ok(kappa_from_confusion(&cm))
}

pub fn kappa_from_confusion(cm: &ConfusionMatrix) -> f64 {
    let n = cm.total() as u128;
    let agree = (cm.n_gg + cm.n_bb) as u128;
    let ref_g = (cm.n_gg + cm.n_gb) as u128;
    let pred_g = (cm.n_gg + cm.n_bg) as u128;
    // n^2 p_e
    let expected = ref_g * pred_g + (n - ref_g) * (n - pred_g);
    let denom = n * n - expected;
    if denom == 0 {
        return 1.0;
    }
    let num = (n * agree) as f64 - expected as f64;
    num / denom as f64
}

/// `(pct_good, pct_bad)` at full precision.
pub fn prediction_rates(predicted: &[QualityLabel]) -> Result<(f64, f64)> {
    if predicted.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let n = predicted.len();
    let good = predicted.iter().filter(|l| l.is_good()).count();
    let pct_good = 100.0 * good as f64 / n as f64;
    let pct_bad = 100.0 * (n - good) as f64 / n as f64;
    Ok((pct_good, pct_bad))
}

/// `"98.41/1.59"`.
pub fn render_rates(pct_good: f64, pct_bad: f64) -> String {
    format!("{pct_good:.2}/{pct_bad:.2}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: String,
    /// Test-split accuracy; `None` when only an unlabeled generated set was scored.
    pub acc: Option<f64>,
    pub f1: Option<f64>,
    pub f1_good: Option<f64>,
    pub f1_bad: Option<f64>,
    pub good_pct: Option<f64>,
    pub bad_pct: Option<f64>,
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRates {
    pub rater: String,
    pub good_pct: f64,
    pub bad_pct: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub reference: Option<ReferenceRates>,
    pub models: Vec<ModelReport>,
}

impl ModelReport {
    /// Accuracy and F1 of `predicted` against ground-truth `truth`.
    pub fn with_test(model: &str, truth: &[QualityLabel], predicted: &[QualityLabel]) -> Result<Self> {
        let cm = ConfusionMatrix::from_labels(truth, predicted)?;
        let (g, b) = cm.f1_per_class()?;
        Ok(ModelReport {
            model: model.to_string(),
            acc: Some(accuracy(&cm)?),
            f1: Some((g + b) / 2.0),
            f1_good: Some(g),
            f1_bad: Some(b),
            good_pct: None,
            bad_pct: None,
            kappa: None,
        })
    }

    pub fn empty(model: &str) -> Self {
        ModelReport {
            model: model.to_string(),
            acc: None,
            f1: None,
            f1_good: None,
            f1_bad: None,
            good_pct: None,
            bad_pct: None,
            kappa: None,
        }
    }

    /// Fills the rate and kappa columns from predictions on a rated generated set.
    pub fn set_agreement(&mut self, reference: &[QualityLabel], predicted: &[QualityLabel]) -> Result<()> {
        let kappa = cohens_kappa(reference, predicted)?;
        let (g, b) = prediction_rates(predicted)?;
        self.good_pct = Some(g);
        self.bad_pct = Some(b);
        self.kappa = Some(kappa);
        Ok(())
    }
}

fn cell(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.decimals$}"))
}

fn csv_cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

impl AgreementReport {
    pub const COLUMNS: [&'static str; 6] = ["model", "acc", "f1", "good_pct", "bad_pct", "kappa"];

    pub fn to_csv(&self) -> String {
        let mut out = Self::COLUMNS.join(",");
        out.push('\n');
        if let Some(r) = &self.reference {
            let _ = writeln!(out, "{},,,{},{},", r.rater, r.good_pct, r.bad_pct);
        }
        for m in &self.models {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                m.model,
                csv_cell(m.acc),
                csv_cell(m.f1),
                csv_cell(m.good_pct),
                csv_cell(m.bad_pct),
                csv_cell(m.kappa)
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Aligned table: accuracy, F1 and kappa to 4 decimals, rates to 2.
    pub fn to_text(&self) -> String {
        let header = ["Model", "Acc", "F1", "Good (%)", "Bad (%)", "kappa"].map(String::from);
        let mut rows: Vec<[String; 6]> = Vec::new();
        if let Some(r) = &self.reference {
            rows.push([
                r.rater.clone(),
                "-".into(),
                "-".into(),
                format!("{:.2}", r.good_pct),
                format!("{:.2}", r.bad_pct),
                "-".into(),
            ]);
        }
        for m in &self.models {
            rows.push([
                m.model.clone(),
                cell(m.acc, 4),
                cell(m.f1, 4),
                cell(m.good_pct, 2),
                cell(m.bad_pct, 2),
                cell(m.kappa, 2),
            ]);
        }
        let mut width = header.clone().map(|h| h.len());
        for r in &rows {
            for (w, c) in width.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        for r in std::iter::once(&header).chain(&rows) {
            let line: Vec<String> = r
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if i == 0 {
                        format!("{c:<w$}", w = width[0])
                    } else {
                        format!("{c:>w$}", w = width[i])
                    }
                })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use QualityLabel::{Bad as B, Good as G};

    fn labels(goods: usize, bads: usize) -> Vec<QualityLabel> {
        let mut v = vec![G; goods];
        v.extend(vec![B; bads]);
        v
    }

    #[test]
    fn accuracy_examples() {
        let cm = ConfusionMatrix {
            n_gg: 60,
            n_gb: 10,
            n_bg: 10,
            n_bb: 63,
        };
        assert_eq!(accuracy(&cm).unwrap(), 123.0 / 143.0);
        let wrong = ConfusionMatrix {
            n_gb: 3,
            n_bg: 4,
            ..Default::default()
        };
        assert_eq!(accuracy(&wrong).unwrap(), 0.0);
        assert!(matches!(accuracy(&ConfusionMatrix::default()), Err(Error::EmptyEvaluation)));
    }

    #[test]
    fn constant_good_macro_f1_is_one_third() {
        let truth = labels(50, 50);
        let pred = vec![G; 100];
        let cm = ConfusionMatrix::from_labels(&truth, &pred).unwrap();
        let (g, b) = cm.f1_per_class().unwrap();
        assert!((g - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(b, 0.0);
        assert!((f1_macro(&cm).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn kappa_anchors() {
        let reference = labels(62, 1);
        assert_eq!(cohens_kappa(&reference, &vec![G; 63]).unwrap(), 0.0);
        assert_eq!(cohens_kappa(&reference, &reference).unwrap(), 1.0);
        let (g, b) = prediction_rates(&reference).unwrap();
        assert_eq!(render_rates(g, b), "98.41/1.59");
        let (g, b) = prediction_rates(&vec![G; 63]).unwrap();
        assert_eq!(render_rates(g, b), "100.00/0.00");
        assert_eq!(cohens_kappa(&[G, G, B, B], &[G, B, G, B]).unwrap(), 0.0);
        assert_eq!(cohens_kappa(&[G, G], &[G, G]).unwrap(), 1.0);
    }

    #[test]
    fn kappa_errors() {
        assert!(matches!(cohens_kappa(&[G], &[G, B]), Err(Error::LengthMismatch { left: 1, right: 2 })));
        assert!(matches!(cohens_kappa(&[], &[]), Err(Error::EmptyEvaluation)));
        assert!(matches!(prediction_rates(&[]), Err(Error::EmptyEvaluation)));
    }

    #[test]
    fn report_layout() {
        let mut report = AgreementReport {
            reference: Some(ReferenceRates {
                rater: "expert".into(),
                good_pct: 100.0 * 62.0 / 63.0,
                bad_pct: 100.0 / 63.0,
            }),
            models: vec![],
        };
        let mut m = ModelReport::with_test("random_forest", &[G, B], &[G, B]).unwrap();
        m.set_agreement(&labels(62, 1), &vec![G; 63]).unwrap();
        report.models.push(m);
        let csv = report.to_csv();
        assert!(csv.starts_with("model,acc,f1,good_pct,bad_pct,kappa\n"));
        assert_eq!(csv.lines().count(), 3);
        let text = report.to_text();
        assert!(text.contains("98.41"));
        assert!(text.lines().nth(2).unwrap().contains("100.00"));
        assert!(text.lines().nth(2).unwrap().ends_with("0.00"));
    }
}
