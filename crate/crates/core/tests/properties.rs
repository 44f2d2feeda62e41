//! Property tests for the invariants each module promises.

mod common;

use proptest::prelude::*;
use rand::Rng as _;

use shapeqc::classifiers::tree::Node;
use shapeqc::classifiers::{Hyperparameters, ModelParams, Row};
use shapeqc::corpus::{split_dataset, LabeledRow, Split, SplitFractions};
use shapeqc::explain::{shapley_exact, shapley_sampled};
use shapeqc::mesh_io::{parse_csv, parse_obj, parse_off, parse_ply, parse_xyz, write_csv, write_ply, write_xyz};
use shapeqc::metrics::{accuracy, cohens_kappa, f1_macro, kappa_from_confusion, ConfusionMatrix};
use shapeqc::rng::rng_from_seed;
use shapeqc::sampler::{sample_surface, sample_surface_detailed, SamplerConfig};
use shapeqc::{
    extract_features, fit, load_model, predict, predict_batch, save_model, FeatureVector, ModelKind, PointCloud,
    QualityLabel, TriangleMesh, N_FEATURES,
};

fn labels(bits: &[bool]) -> Vec<QualityLabel> {
    bits.iter().map(|&b| QualityLabel::from_bool(b)).collect()
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    [-500.0f64..500.0, -500.0f64..500.0, -500.0f64..500.0]
}

fn row() -> impl Strategy<Value = Row> {
    prop::array::uniform14(-3.0f64..3.0)
}

/// Two labelled blobs in 14-D, separated along a random direction.
fn blobs(n: usize, seed: u64) -> Vec<(FeatureVector, QualityLabel)> {
    let mut rng = rng_from_seed(seed);
    let dir: Row = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    (0..n)
        .map(|i| {
            let good = i % 2 == 0;
            let s = if good { 1.5 } else { -1.5 };
            let x: Row = std::array::from_fn(|j| 10.0 * j as f64 + s * dir[j] + rng.random_range(-1.0..1.0));
            (FeatureVector(x), QualityLabel::from_bool(good))
        })
        .collect()
}

fn quick_hyper() -> Hyperparameters {
    let mut h = Hyperparameters::default();
    h.mlp.epochs = 20;
    h.forest.n_trees = 20;
    h.gradient_boosting.n_estimators = 20;
    h
}

// metrics

proptest! {
    #[test]
    fn kappa_is_symmetric_and_bounded(pairs in prop::collection::vec(any::<(bool, bool)>(), 1..200)) {
        let a = labels(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
        let b = labels(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
        let k = cohens_kappa(&a, &b).unwrap();
        prop_assert_eq!(k, cohens_kappa(&b, &a).unwrap());
        prop_assert!((-1.0..=1.0).contains(&k));
    }

    #[test]
    fn kappa_self_and_constant(bits in prop::collection::vec(any::<bool>(), 2..200)) {
        let a = labels(&bits);
        let nonconstant = bits.iter().any(|&b| b) && bits.iter().any(|&b| !b);
        if nonconstant {
            prop_assert_eq!(cohens_kappa(&a, &a).unwrap(), 1.0);
            for c in [QualityLabel::Good, QualityLabel::Bad] {
                prop_assert_eq!(cohens_kappa(&a, &vec![c; a.len()]).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn accuracy_is_observed_agreement(pairs in prop::collection::vec(any::<(bool, bool)>(), 1..200)) {
        let a = labels(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
        let b = labels(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
        let cm = ConfusionMatrix::from_labels(&a, &b).unwrap();
        let agree = pairs.iter().filter(|p| p.0 == p.1).count();
        prop_assert_eq!(accuracy(&cm).unwrap(), agree as f64 / pairs.len() as f64);
    }

    #[test]
    fn macro_f1_equals_accuracy_when_confusion_is_symmetric(diag in 1u64..50, off in 0u64..50) {
        let cm = ConfusionMatrix { n_gg: diag, n_gb: off, n_bg: off, n_bb: diag };
        let (f1, acc) = (f1_macro(&cm).unwrap(), accuracy(&cm).unwrap());
        prop_assert!((f1 - acc).abs() < 1e-12, "{} vs {}", f1, acc);
    }
}

/// Every metric against a plain recount over 1000 random label pairs.
#[test]
fn metrics_match_brute_force_recount() {
    let mut rng = rng_from_seed(77);
    for _ in 0..1000 {
        let n = rng.random_range(1..60);
        let a: Vec<bool> = (0..n).map(|_| rng.random_bool(0.6)).collect();
        let b: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let cm = ConfusionMatrix::from_labels(&labels(&a), &labels(&b)).unwrap();
        let count = |x: bool, y: bool| a.iter().zip(&b).filter(|(p, q)| **p == x && **q == y).count() as u64;
        assert_eq!((cm.n_gg, cm.n_gb, cm.n_bg, cm.n_bb), (count(true, true), count(true, false), count(false, true), count(false, false)));

        let nf = n as f64;
        let po = (count(true, true) + count(false, false)) as f64 / nf;
        let ref_good = a.iter().filter(|&&x| x).count() as f64 / nf;
        let pred_good = b.iter().filter(|&&x| x).count() as f64 / nf;
        let pe = ref_good * pred_good + (1.0 - ref_good) * (1.0 - pred_good);
        let want = if pe == 1.0 { 1.0 } else { (po - pe) / (1.0 - pe) };
        assert!((kappa_from_confusion(&cm) - want).abs() < 1e-12);
        assert_eq!(accuracy(&cm).unwrap(), po);

        let f1 = |tp: u64, fp: u64, fneg: u64| {
            let (p, r) = (tp as f64 / (tp + fp) as f64, tp as f64 / (tp + fneg) as f64);
            if tp == 0 { 0.0 } else { 2.0 * p * r / (p + r) }
        };
        let good = f1(count(true, true), count(false, true), count(true, false));
        let bad = f1(count(false, false), count(true, false), count(false, true));
        assert!((f1_macro(&cm).unwrap() - (good + bad) / 2.0).abs() < 1e-12);
    }
}

// mesh_io, sampler, features

proptest! {
    #[test]
    fn cloud_text_formats_roundtrip(points in prop::collection::vec(point(), 0..50)) {
        let cloud = PointCloud::new(points.clone()).unwrap();
        for back in [parse_xyz(&write_xyz(&cloud)), parse_csv(&write_csv(&cloud)), parse_ply(&write_ply(&cloud))] {
            let back = back.unwrap();
            prop_assert_eq!(back.count(), points.len());
            for (p, q) in back.points().iter().zip(&points) {
                for a in 0..3 {
                    prop_assert!((p[a] - q[a]).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn parsers_never_panic(text in "[ -~\n]{0,200}") {
        let _ = parse_obj(&text);
        let _ = parse_off(&text);
        let _ = parse_xyz(&text);
        let _ = parse_csv(&text);
        let _ = parse_ply(&text);
    }

    #[test]
    fn parsers_never_panic_on_structured_noise(
        head in prop::sample::select(vec!["OFF\n", "ply\nformat ascii 1.0\n", "x,y,z\n", "v ", "f "]),
        body in "[-0-9 .eEfv\n]{0,120}",
    ) {
        let text = format!("{head}{body}");
        let _ = parse_obj(&text);
        let _ = parse_off(&text);
        let _ = parse_csv(&text);
        let _ = parse_ply(&text);
    }

    #[test]
    fn samples_are_convex_combinations(a in point(), b in point(), c in point(), d in point(), seed: u64) {
        let mesh = TriangleMesh::new(vec![a, b, c, d], vec![[0, 1, 2], [0, 2, 3]]).unwrap();
        prop_assume!(mesh.surface_area() > 1e-6);
        let cfg = SamplerConfig::new(200, seed).unwrap();
        let samples = sample_surface_detailed(&mesh, &cfg).unwrap();
        for s in &samples {
            prop_assert!(s.weights.iter().all(|&w| w >= -1e-12));
            prop_assert!((s.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            let [p0, p1, p2] = mesh.triangle(s.face);
            let scale = [p0, p1, p2].iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
            for k in 0..3 {
                let want = s.weights[0] * p0[k] + s.weights[1] * p1[k] + s.weights[2] * p2[k];
                prop_assert!((s.point[k] - want).abs() <= 1e-12 * scale);
            }
        }
        prop_assert_eq!(sample_surface(&mesh, &cfg).unwrap(), sample_surface(&mesh, &cfg).unwrap());
    }

    #[test]
    fn features_are_permutation_invariant(points in prop::collection::vec(point(), 1..300), seed: u64) {
        let f = extract_features(&PointCloud::new(points.clone()).unwrap()).unwrap();
        let mut shuffled = points;
        rand::seq::SliceRandom::shuffle(&mut shuffled[..], &mut rng_from_seed(seed));
        let g = extract_features(&PointCloud::new(shuffled).unwrap()).unwrap();
        for j in 0..N_FEATURES {
            prop_assert!((f.0[j] - g.0[j]).abs() <= 1e-12 * f.0[j].abs().max(1.0));
        }
    }

    #[test]
    fn features_translate_covariantly(points in prop::collection::vec(point(), 1..300), t in point()) {
        let f = extract_features(&PointCloud::new(points.clone()).unwrap()).unwrap();
        let moved: Vec<[f64; 3]> = points.iter().map(|p| [p[0] + t[0], p[1] + t[1], p[2] + t[2]]).collect();
        let g = extract_features(&PointCloud::new(moved).unwrap()).unwrap();
        for a in 0..3 {
            // exact up to the rounding of the translated coordinates themselves
            let tol = 4.0 * f64::EPSILON * (1000.0 + t[a].abs());
            prop_assert!((g.min()[a] - f.min()[a] - t[a]).abs() <= tol);
            prop_assert!((g.max()[a] - f.max()[a] - t[a]).abs() <= tol);
            prop_assert!((g.mean()[a] - f.mean()[a] - t[a]).abs() <= tol);
            prop_assert!((g.std()[a] - f.std()[a]).abs() <= 1e-9);
            prop_assert!(f.min()[a] <= f.mean()[a] && f.mean()[a] <= f.max()[a]);
        }
    }

    #[test]
    fn features_match_the_oracle(points in prop::collection::vec(point(), 1..300)) {
        let f = extract_features(&PointCloud::new(points.clone()).unwrap()).unwrap();
        let want = common::features_oracle(&points);
        for j in 0..N_FEATURES {
            prop_assert!(common::rel_err(f.0[j], want[j], 500.0) <= 1e-9, "{}", j);
        }
    }
}

// corpus splits

proptest! {
    #[test]
    fn split_is_a_stratified_partition(n_good in 0usize..80, n_bad in 0usize..80, seed: u64) {
        let n = n_good + n_bad;
        prop_assume!(n >= 3);
        let rows: Vec<LabeledRow> = (0..n)
            .map(|i| LabeledRow {
                id: format!("s{i}"),
                features: FeatureVector([i as f64; N_FEATURES]),
                label: QualityLabel::from_bool(i < n_good),
            })
            .collect();
        let fr = SplitFractions::default();
        let Ok(ds) = split_dataset(rows.clone(), fr, seed) else {
            return Ok(());
        };
        prop_assert_eq!(&ds, &split_dataset(rows, fr, seed).unwrap());
        let sizes = fr.sizes(n).unwrap();
        let parts = [ds.train(), ds.val(), ds.test()];
        let mut ids: Vec<&str> = parts.iter().flatten().map(|r| r.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        prop_assert_eq!(ids.len(), n);
        for (s, part) in parts.iter().enumerate() {
            prop_assert_eq!(part.len(), sizes[s]);
            let good = part.iter().filter(|r| r.label.is_good()).count() as f64;
            let quota = part.len() as f64 * n_good as f64 / n as f64;
            prop_assert!((good - quota).abs() <= 1.0, "split {}: {} vs {}", s, good, quota);
        }
        prop_assert!(ds.assignments().all(|(_, s)| matches!(s, Split::Train | Split::Val | Split::Test)));
    }
}

// classifiers

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn fit_is_deterministic_and_scores_are_calibrated(seed in 0u64..1000, xs in prop::collection::vec(row(), 1..20)) {
        let data = blobs(40, seed);
        let hyper = quick_hyper();
        for kind in ModelKind::ALL {
            let m = fit(kind, &data, &hyper, seed).unwrap();
            prop_assert_eq!(&m, &fit(kind, &data, &hyper, seed).unwrap());
            let xs: Vec<FeatureVector> = xs.iter().map(|z| FeatureVector(std::array::from_fn(|j| 10.0 * j as f64 + 3.0 * z[j]))).collect();
            let batch = predict_batch(&m, &xs);
            prop_assert_eq!(batch.len(), xs.len());
            for (x, p) in xs.iter().zip(&batch) {
                prop_assert_eq!(*p, predict(&m, x));
                prop_assert!((0.0..=1.0).contains(&p.score));
                prop_assert_eq!(p.label.is_good(), p.score > 0.5);
            }
        }
    }

    #[test]
    fn single_class_training_gives_a_constant_model(seed in 0u64..1000, good: bool, x in row()) {
        let label = QualityLabel::from_bool(good);
        let data: Vec<_> = blobs(10, seed).into_iter().map(|(x, _)| (x, label)).collect();
        for kind in ModelKind::ALL {
            let m = fit(kind, &data, &quick_hyper(), seed).unwrap();
            prop_assert!(m.degenerate);
            let p = predict(&m, &FeatureVector(x));
            prop_assert_eq!(p.label, label);
            prop_assert_eq!(p.score, if good { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn tree_labels_survive_increasing_affine_maps(
        seed in 0u64..1000,
        scale in prop::array::uniform14(0.01f64..100.0),
        shift in prop::array::uniform14(-1000.0f64..1000.0),
    ) {
        let data = blobs(60, seed);
        let (train, test) = data.split_at(45);
        let map = |x: &FeatureVector| FeatureVector(std::array::from_fn(|j| scale[j] * x.0[j] + shift[j]));
        let mapped: Vec<_> = train.iter().map(|(x, l)| (map(x), *l)).collect();
        for kind in ModelKind::ALL.into_iter().filter(|k| k.is_tree_based()) {
            let a = fit(kind, train, &quick_hyper(), seed).unwrap();
            let b = fit(kind, &mapped, &quick_hyper(), seed).unwrap();
            for (x, _) in test {
                prop_assert_eq!(predict(&a, x).label, predict(&b, &map(x)).label, "{}", kind);
            }
        }
    }

    /// Threshold trees with data-point thresholds (everything but extra trees)
    /// only see the ordering of each feature, so any increasing map preserves
    /// the labels on the training rows.
    #[test]
    fn tree_training_labels_survive_nonlinear_increasing_maps(seed in 0u64..1000) {
        let data = blobs(50, seed);
        let map = |x: &FeatureVector| FeatureVector(std::array::from_fn(|j| {
            let v = x.0[j] - 10.0 * j as f64;
            if j % 2 == 0 { v * v * v + v } else { v.exp() }
        }));
        let mapped: Vec<_> = data.iter().map(|(x, l)| (map(x), *l)).collect();
        for kind in [ModelKind::DecisionTree, ModelKind::RandomForest, ModelKind::Adaboost, ModelKind::GradientBoosting] {
            let a = fit(kind, &data, &quick_hyper(), seed).unwrap();
            let b = fit(kind, &mapped, &quick_hyper(), seed).unwrap();
            for (x, _) in &data {
                prop_assert_eq!(predict(&a, x).label, predict(&b, &map(x)).label, "{}", kind);
            }
        }
    }
}

#[test]
fn save_load_preserves_predictions_on_random_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let data = blobs(60, 5);
    let mut rng = rng_from_seed(6);
    let probes: Vec<FeatureVector> = (0..1000)
        .map(|_| FeatureVector(std::array::from_fn(|j| 10.0 * j as f64 + rng.random_range(-4.0..4.0))))
        .collect();
    for kind in ModelKind::ALL {
        let m = fit(kind, &data, &quick_hyper(), 9).unwrap();
        let path = dir.path().join(format!("{kind}.json"));
        save_model(&m, &path).unwrap();
        let back = load_model(&path).unwrap();
        for x in &probes {
            let (p, q) = (predict(&m, x), predict(&back, x));
            assert_eq!(p.label, q.label, "{kind}");
            assert!((p.score - q.score).abs() <= 1e-12, "{kind}");
        }
    }
}

/// A one-stump AdaBoost flips its label exactly once along the split feature,
/// between the grid points that bracket the stump threshold in raw units.
#[test]
fn single_stump_adaboost_flips_at_its_threshold() {
    let mut hyper = Hyperparameters::default();
    hyper.adaboost.n_estimators = 1;
    for seed in 0..10 {
        let m = fit(ModelKind::Adaboost, &blobs(40, seed), &hyper, seed).unwrap();
        let ModelParams::Adaboost(ab) = &m.parameters else {
            panic!("not adaboost")
        };
        assert_eq!(ab.stumps.len(), 1);
        let Node::Split { feature, threshold, .. } = ab.stumps[0].nodes()[0] else {
            panic!("stump has no split")
        };
        let raw = m.standardization.mean[feature] + threshold * m.standardization.std[feature];
        let base = blobs(1, seed + 100)[0].0;
        let grid: Vec<f64> = (0..=400).map(|i| raw - 20.0 + 0.1 * i as f64).collect();
        let preds: Vec<bool> = grid
            .iter()
            .map(|&v| {
                let mut x = base;
                x.0[feature] = v;
                predict(&m, &x).label.is_good()
            })
            .collect();
        let flips: Vec<usize> = (1..preds.len()).filter(|&i| preds[i] != preds[i - 1]).collect();
        assert_eq!(flips.len(), 1, "seed {seed}");
        let i = flips[0];
        assert!(grid[i - 1] <= raw + 1e-9 && raw <= grid[i] + 1e-9, "seed {seed}: {raw} not in [{}, {}]", grid[i - 1], grid[i]);
    }
}

// explain

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn exact_shapley_axioms(
        w in prop::array::uniform14(-2.0f64..2.0),
        c in -1.0f64..1.0,
        x in row(),
        bg in prop::collection::vec(row(), 1..4),
        null in 2usize..N_FEATURES,
    ) {
        // symmetric in features 0 and 1, ignores feature `null`
        let model = |z: &Row| {
            let mut t = w[0] * (z[0] + z[1]) + c * z[0] * z[1];
            for j in 2..N_FEATURES {
                if j != null {
                    t += w[j] * z[j];
                }
            }
            sigmoid(t)
        };
        let mut x = x;
        x[1] = x[0];
        let bg: Vec<Row> = bg.into_iter().map(|mut b| { b[1] = b[0]; b }).collect();
        let a = shapley_exact(&model, "i", &x, &bg).unwrap();
        prop_assert!(a.efficiency_gap().abs() <= 1e-6);
        prop_assert!((a.phi[0] - a.phi[1]).abs() <= 1e-9);
        prop_assert_eq!(a.phi[null], 0.0);
    }

    #[test]
    fn exact_shapley_matches_subset_enumeration(x in row(), bg in prop::collection::vec(row(), 1..3), w in prop::array::uniform14(-1.0f64..1.0)) {
        let model = |z: &Row| sigmoid(w.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() + z[0] * z[3]);
        let a = shapley_exact(&model, "i", &x, &bg).unwrap();
        let want = common::shapley_brute(model, &x, &bg);
        for j in 0..N_FEATURES {
            prop_assert!((a.phi[j] - want[j]).abs() <= 1e-9);
        }
    }
}

#[test]
fn sampled_shapley_is_within_five_standard_errors_on_a_linear_model() {
    let mut rng = rng_from_seed(21);
    let w: Row = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
    let model = move |z: &Row| w.iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
    let bg: Vec<Row> = (0..16).map(|_| std::array::from_fn(|_| rng.random_range(-2.0..2.0))).collect();
    let x: Row = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
    let exact = shapley_exact(&model, "i", &x, &bg).unwrap();
    let est = shapley_sampled(&model, "i", &x, &bg, 2000, 4).unwrap();
    let se = est.std_err.unwrap();
    for j in 0..N_FEATURES {
        assert!((est.phi[j] - exact.phi[j]).abs() <= 5.0 * se[j], "feature {j}: {} vs {} (se {})", est.phi[j], exact.phi[j], se[j]);
    }
    assert_eq!(est, shapley_sampled(&model, "i", &x, &bg, 2000, 4).unwrap());
    assert_eq!(shapley_sampled(&model, "i", &x, &bg, 1, 8).unwrap(), shapley_sampled(&model, "i", &x, &bg, 1, 8).unwrap());
}

/// Quadrupling the permutations roughly halves the error; averaged over seeds
/// the ratio must at least fall clearly below one.
#[test]
fn sampled_shapley_converges() {
    let mut rng = rng_from_seed(31);
    let w: Row = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let model = move |z: &Row| sigmoid(w.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() + z[0] * z[1] - z[2] * z[5]);
    let bg: Vec<Row> = (0..8).map(|_| std::array::from_fn(|_| rng.random_range(-2.0..2.0))).collect();
    let x: Row = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
    let exact = shapley_exact(&model, "i", &x, &bg).unwrap();
    let rmse = |n: usize| {
        (0..40)
            .map(|s| {
                let a = shapley_sampled(&model, "i", &x, &bg, n, s).unwrap();
                a.phi.iter().zip(&exact.phi).map(|(p, q)| (p - q).powi(2)).sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    };
    let (coarse, fine) = (rmse(100), rmse(400));
    let ratio = fine / coarse;
    assert!((0.3..=0.75).contains(&ratio), "error ratio {ratio} ({coarse} -> {fine})");
}
