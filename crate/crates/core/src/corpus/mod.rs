//! Labels, stratified splits and the synthetic shape corpus.

mod shapes;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use shapes::{
    apply_defect, box_mesh, generate_shape, good_shape, truncate_below, DefectKind, DefectSpec,
    AXIS_JITTER, BASE_SEMI_AXES, GOOD_MIN_Z_ANCHOR, MIN_Z_JITTER,
};

use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureRow, FeatureVector};
use crate::mesh_io::TriangleMesh;
use crate::rng::{derive_seed, hash_id, rng_from_seed};
use crate::sampler::{sample_surface, SamplerConfig};

/// Binary quality verdict. `Bad = 0`, `Good = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QualityLabel {
    Bad = 0,
    Good = 1,
}

impl QualityLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            QualityLabel::Good => "Good",
            QualityLabel::Bad => "Bad",
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self as u8)
    }

    pub fn from_bool(good: bool) -> Self {
        if good {
            QualityLabel::Good
        } else {
            QualityLabel::Bad
        }
    }

    pub fn is_good(self) -> bool {
        self == QualityLabel::Good
    }
}

impl fmt::Display for QualityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QualityLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "Good" | "good" | "GOOD" | "1" => Ok(QualityLabel::Good),
            "Bad" | "bad" | "BAD" | "0" => Ok(QualityLabel::Bad),
            other => Err(Error::parse(0, format!("unknown label {other:?}"))),
        }
    }
}

/// The five expert review categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceCategory {
    Usable,
    NoFullShape,
    RequiresEditing,
    NotUsable,
    NotSure,
}

impl SourceCategory {
    pub const ALL: [SourceCategory; 5] = [
        SourceCategory::Usable,
        SourceCategory::NoFullShape,
        SourceCategory::RequiresEditing,
        SourceCategory::NotUsable,
        SourceCategory::NotSure,
    ];

    /// Review category a defect of this kind would receive.
    pub fn for_defect(kind: DefectKind) -> Self {
        match kind {
            DefectKind::TruncateInferior | DefectKind::Fragment => SourceCategory::NoFullShape,
            DefectKind::Spikes => SourceCategory::RequiresEditing,
            DefectKind::ScaleAnomaly | DefectKind::SlabNonorgan => SourceCategory::NotUsable,
        }
    }
}

/// Only `Usable` shapes count as good.
pub fn map_label(cat: SourceCategory) -> QualityLabel {
    match cat {
        SourceCategory::Usable => QualityLabel::Good,
        SourceCategory::NoFullShape
        | SourceCategory::RequiresEditing
        | SourceCategory::NotUsable
        | SourceCategory::NotSure => QualityLabel::Bad,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::parse(0, format!("unknown split {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRow {
    pub id: String,
    pub features: FeatureVector,
    pub label: QualityLabel,
}

impl TryFrom<FeatureRow> for LabeledRow {
    type Error = Error;

    fn try_from(row: FeatureRow) -> Result<Self> {
        let label = row
            .label
            .ok_or_else(|| Error::InvalidSpec(format!("row {} has no label", row.id)))?;
        Ok(LabeledRow {
            id: row.id,
            features: row.features,
            label,
        })
    }
}

/// Labeled rows with a train/val/test assignment per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    rows: Vec<LabeledRow>,
    split: Vec<Split>,
}

impl LabeledDataset {
    pub fn new(rows: Vec<LabeledRow>, split: Vec<Split>) -> Result<Self> {
        if rows.len() != split.len() {
            return Err(Error::LengthMismatch {
                left: rows.len(),
                right: split.len(),
            });
        }
        let mut seen = HashSet::new();
        for r in &rows {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::InvalidSpec(format!("duplicate id {}", r.id)));
            }
        }
        Ok(Self { rows, split })
    }

    pub fn rows(&self) -> &[LabeledRow] {
        &self.rows
    }

    pub fn split_of(&self, index: usize) -> Split {
        self.split[index]
    }

    pub fn assignments(&self) -> impl Iterator<Item = (&str, Split)> {
        self.rows.iter().map(|r| r.id.as_str()).zip(self.split.iter().copied())
    }

    pub fn subset(&self, which: Split) -> Vec<&LabeledRow> {
        self.rows
            .iter()
            .zip(&self.split)
            .filter(|(_, s)| **s == which)
            .map(|(r, _)| r)
            .collect()
    }

    pub fn train(&self) -> Vec<&LabeledRow> {
        self.subset(Split::Train)
    }

    pub fn val(&self) -> Vec<&LabeledRow> {
        self.subset(Split::Val)
    }

    pub fn test(&self) -> Vec<&LabeledRow> {
        self.subset(Split::Test)
    }

    pub fn split_csv(&self) -> String {
        write_split_csv(self.assignments())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.80,
            val: 0.05,
            test: 0.15,
        }
    }
}

impl SplitFractions {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self> {
        let f = Self { train, val, test };
        let ok = [train, val, test].iter().all(|x| (0.0..=1.0).contains(x))
            && (train + val + test - 1.0).abs() <= 1e-12;
        if !ok {
            return Err(Error::InvalidSpec(format!(
                "split fractions ({train}, {val}, {test}) must be in [0,1] and sum to 1"
            )));
        }
        Ok(f)
    }

    /// Split sizes for `n` rows: val and test are rounded, train takes the rest.
    pub fn sizes(&self, n: usize) -> Result<[usize; 3]> {
        let val = (n as f64 * self.val).round() as usize;
        let test = (n as f64 * self.test).round() as usize;
        if val + test > n {
            return Err(Error::TooFewRows(format!(
                "{n} rows cannot hold {val} validation and {test} test rows"
            )));
        }
        Ok([n - val - test, val, test])
    }
}

/// Seeded split stratified by label.
///
/// The global sizes come from [`SplitFractions::sizes`]. The good rows are
/// distributed over the splits by largest remainder of their proportional
/// quota, so every split holds each label within one row of the global ratio.
pub fn split_dataset(
    rows: Vec<LabeledRow>,
    fractions: SplitFractions,
    seed: u64,
) -> Result<LabeledDataset> {
    let fractions = SplitFractions::new(fractions.train, fractions.val, fractions.test)?;
    let n = rows.len();
    if n < 3 {
        return Err(Error::TooFewRows(format!("need at least 3 rows, got {n}")));
    }
    let sizes = fractions.sizes(n)?;

    let good: Vec<usize> = (0..n).filter(|&i| rows[i].label.is_good()).collect();
    let bad: Vec<usize> = (0..n).filter(|&i| !rows[i].label.is_good()).collect();
    let n_good = good.len();

    let quotas: Vec<f64> = sizes
        .iter()
        .map(|&s| s as f64 * n_good as f64 / n as f64)
        .collect();
    let mut good_alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut leftover = n_good - good_alloc.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &s in &order {
        if leftover == 0 {
            break;
        }
        if good_alloc[s] < sizes[s] {
            good_alloc[s] += 1;
            leftover -= 1;
        }
    }
    let bad_alloc: Vec<usize> = (0..3).map(|s| sizes[s] - good_alloc[s]).collect();

    let n_labels = usize::from(!good.is_empty()) + usize::from(!bad.is_empty());
    for s in 0..3 {
        if sizes[s] >= n_labels
            && sizes[s] > 0
            && ((!good.is_empty() && good_alloc[s] == 0) || (!bad.is_empty() && bad_alloc[s] == 0))
        {
            return Err(Error::TooFewRows(format!(
                "the {} split would miss a label ({} good, {} bad rows available)",
                Split::ALL[s].as_str(),
                good.len(),
                bad.len()
            )));
        }
    }

    let mut rng = rng_from_seed(seed);
    let mut split = vec![Split::Train; n];
    for (mut members, alloc) in [(good, good_alloc), (bad, bad_alloc)] {
        members.shuffle(&mut rng);
        let mut it = members.into_iter();
        for (s, count) in [(Split::Test, alloc[2]), (Split::Val, alloc[1])] {
            for i in it.by_ref().take(count) {
                split[i] = s;
            }
        }
    }
    LabeledDataset::new(rows, split)
}

pub fn write_split_csv<'a>(assignments: impl Iterator<Item = (&'a str, Split)>) -> String {
    let mut out = String::from("id,split\n");
    for (id, s) in assignments {
        out.push_str(id);
        out.push(',');
        out.push_str(s.as_str());
        out.push('\n');
    }
    out
}

pub fn parse_split_csv(text: &str) -> Result<Vec<(String, Split)>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == "id,split" => {}
        _ => return Err(Error::parse(1, "expected header `id,split`")),
    }
    lines
        .map(|(i, l)| {
            let (id, s) = l
                .split_once(',')
                .ok_or_else(|| Error::parse(i + 1, "expected `id,split`"))?;
            let split = s
                .parse::<Split>()
                .map_err(|_| Error::parse(i + 1, format!("unknown split {s:?}")))?;
            Ok((id.trim().to_string(), split))
        })
        .collect()
}

/// Joins labeled rows with a split file. Ids in the split file that have no
/// row are reported; rows missing from the split file are left out.
pub fn apply_split(rows: Vec<LabeledRow>, assignments: &[(String, Split)]) -> Result<LabeledDataset> {
    let by_id: HashMap<&str, Split> = assignments.iter().map(|(id, s)| (id.as_str(), *s)).collect();
    let known: HashSet<&str> = rows.iter().map(|r| r.id.as_str()).collect();
    let unknown: Vec<&str> = assignments
        .iter()
        .map(|(id, _)| id.as_str())
        .filter(|id| !known.contains(id))
        .collect();
    if !unknown.is_empty() {
        return Err(Error::InvalidSpec(format!(
            "split file references unknown ids: {}",
            unknown.join(", ")
        )));
    }
    let mut kept = Vec::new();
    let mut split = Vec::new();
    for row in rows {
        if let Some(&s) = by_id.get(row.id.as_str()) {
            split.push(s);
            kept.push(row);
        }
    }
    LabeledDataset::new(kept, split)
}

/// Relative weights of the defect kinds used for bad shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectMix(pub BTreeMap<DefectKind, f64>);

impl Default for DefectMix {
    /// 40 % truncation, 30 % fragments, 15 % spikes, 15 % scale.
    fn default() -> Self {
        DefectMix(BTreeMap::from([
            (DefectKind::TruncateInferior, 0.40),
            (DefectKind::Fragment, 0.30),
            (DefectKind::Spikes, 0.15),
            (DefectKind::ScaleAnomaly, 0.15),
        ]))
    }
}

impl DefectMix {
    pub fn only(kind: DefectKind) -> Self {
        DefectMix(BTreeMap::from([(kind, 1.0)]))
    }

    /// Deterministic per-kind counts for `n` bad shapes (largest remainder).
    pub fn allocate(&self, n: usize) -> Result<Vec<(DefectKind, usize)>> {
        let total: f64 = self.0.values().sum();
        if self.0.values().any(|w| !(w.is_finite() && *w >= 0.0)) || !(total > 0.0) {
            return Err(Error::InvalidSpec("defect mix needs non-negative weights with a positive sum".into()));
        }
        let quotas: Vec<(DefectKind, f64)> =
            self.0.iter().map(|(k, w)| (*k, n as f64 * w / total)).collect();
        let mut counts: Vec<(DefectKind, usize)> =
            quotas.iter().map(|(k, q)| (*k, q.floor() as usize)).collect();
        let mut rest = n - counts.iter().map(|c| c.1).sum::<usize>();
        let mut order: Vec<usize> = (0..quotas.len()).collect();
        order.sort_by(|&a, &b| {
            let fa = quotas[a].1 - quotas[a].1.floor();
            let fb = quotas[b].1 - quotas[b].1.floor();
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        for i in order.into_iter().cycle() {
            if rest == 0 {
                break;
            }
            counts[i].1 += 1;
            rest -= 1;
        }
        Ok(counts)
    }
}

impl FromStr for DefectMix {
    type Err = Error;

    /// `truncate=0.4,fragment=0.3,...`; kind names as accepted by [`DefectKind::parse`].
    fn from_str(s: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, w) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidSpec(format!("bad mix entry {part:?}")))?;
            let kind = DefectKind::parse(k.trim())
                .ok_or_else(|| Error::InvalidSpec(format!("unknown defect kind {k:?}")))?;
            let w: f64 = w
                .trim()
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("bad weight {w:?}")))?;
            map.insert(kind, w);
        }
        Ok(DefectMix(map))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusItem {
    pub id: String,
    pub category: SourceCategory,
    pub defect: Option<DefectSpec>,
    pub seed: u64,
    pub mesh: TriangleMesh,
}

impl CorpusItem {
    pub fn label(&self) -> QualityLabel {
        map_label(self.category)
    }
}

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestItem {
    pub id: String,
    pub category: SourceCategory,
    pub label: QualityLabel,
    pub defect: Option<DefectSpec>,
    pub seed: u64,
    pub mesh_path: Option<String>,
    pub cloud_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub version: u32,
    pub master_seed: u64,
    /// Free-text note on how the synthetic shapes and defects are made.
    pub notes: String,
    pub defect_magnitude_ranges: BTreeMap<DefectKind, (f64, f64)>,
    pub items: Vec<ManifestItem>,
}

impl CorpusManifest {
    pub fn from_items(master_seed: u64, items: &[CorpusItem]) -> Self {
        Self {
            version: MANIFEST_VERSION,
            master_seed,
            notes: "synthetic corpus: good = bumped ellipsoid anchored at a fixed inferior z; \
                    bad = good shape with an invented defect (kinds and magnitude ranges below)"
                .into(),
            defect_magnitude_ranges: DefectKind::ALL
                .iter()
                .map(|k| (*k, k.corpus_magnitude_range()))
                .collect(),
            items: items
                .iter()
                .map(|it| ManifestItem {
                    id: it.id.clone(),
                    category: it.category,
                    label: it.label(),
                    defect: it.defect,
                    seed: it.seed,
                    mesh_path: None,
                    cloud_path: None,
                })
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Self = serde_json::from_str(&text)?;
        if m.version != MANIFEST_VERSION {
            return Err(Error::SchemaMismatch {
                expected: MANIFEST_VERSION,
                found: m.version.to_string(),
            });
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// `n_good` good shapes followed by `n_bad` defective ones.
///
/// Item `i` uses seed `derive_seed(master_seed, i)`; bad kinds are allocated
/// deterministically from `mix` and magnitudes drawn from each kind's corpus range.
pub fn generate_corpus(
    n_good: usize,
    n_bad: usize,
    mix: &DefectMix,
    master_seed: u64,
) -> Result<Vec<CorpusItem>> {
    let kinds: Vec<DefectKind> = if n_bad == 0 {
        Vec::new()
    } else {
        mix.allocate(n_bad)?
            .into_iter()
            .flat_map(|(k, c)| std::iter::repeat_n(k, c))
            .collect()
    };
    let plans: Vec<(usize, Option<DefectKind>)> = (0..n_good)
        .map(|i| (i, None))
        .chain(kinds.into_iter().enumerate().map(|(j, k)| (n_good + j, Some(k))))
        .collect();
    plans
        .into_par_iter()
        .map(|(i, kind)| {
            let seed = derive_seed(master_seed, i as u64);
            let id = format!("shape_{i:05}");
            match kind {
                None => Ok(CorpusItem {
                    id,
                    category: SourceCategory::Usable,
                    defect: None,
                    seed,
                    mesh: generate_shape(true, None, seed)?,
                }),
                Some(kind) => {
                    let (lo, hi) = kind.corpus_magnitude_range();
                    let magnitude = rng_from_seed(derive_seed(seed, 2)).random_range(lo..=hi);
                    let defect = DefectSpec::new(kind, magnitude, derive_seed(seed, 1))?;
                    Ok(CorpusItem {
                        id,
                        category: SourceCategory::for_defect(kind),
                        defect: Some(defect),
                        seed,
                        mesh: generate_shape(false, Some(&defect), seed)?,
                    })
                }
            }
        })
        .collect()
}

/// Per-item sampling seed: a stream of `master` keyed by the item id.
pub fn cloud_seed(master: u64, id: &str) -> u64 {
    derive_seed(master, hash_id(id))
}

/// Samples every item's surface and extracts its features.
pub fn featurize_items(items: &[CorpusItem], n_points: usize, seed: u64) -> Result<Vec<LabeledRow>> {
    items
        .par_iter()
        .map(|it| {
            let cfg = SamplerConfig::new(n_points, cloud_seed(seed, &it.id))?;
            let cloud = sample_surface(&it.mesh, &cfg)?;
            Ok(LabeledRow {
                id: it.id.clone(),
                features: extract_features(&cloud)?,
                label: it.label(),
            })
        })
        .collect()
}
