use proptest::prelude::*;

use shapeqc::corpus::{
    apply_defect, generate_corpus, generate_shape, good_shape, map_label, CorpusManifest, DefectKind, DefectMix,
    DefectSpec, SourceCategory,
};
use shapeqc::sampler::{sample_surface, SamplerConfig};
use shapeqc::{extract_features, QualityLabel, TriangleMesh};

/// Connected components of the face-adjacency graph (faces sharing a vertex),
/// by breadth-first search over a vertex-to-face incidence list.
fn face_components(mesh: &TriangleMesh) -> usize {
    let faces = mesh.faces();
    let mut incident = vec![Vec::new(); mesh.vertices().len()];
    for (f, tri) in faces.iter().enumerate() {
        for &v in tri {
            incident[v].push(f);
        }
    }
    let mut seen = vec![false; faces.len()];
    let mut components = 0;
    for start in 0..faces.len() {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(f) = queue.pop_front() {
            for &v in &faces[f] {
                for &g in &incident[v] {
                    if !seen[g] {
                        seen[g] = true;
                        queue.push_back(g);
                    }
                }
            }
        }
    }
    components
}

#[test]
fn fragment_splits_the_surface() {
    for seed in 0..5 {
        let d = DefectSpec::new(DefectKind::Fragment, 0.2, seed).unwrap();
        let mesh = generate_shape(false, Some(&d), 100 + seed).unwrap();
        assert_eq!(face_components(&good_shape(100 + seed)), 1);
        assert!(face_components(&mesh) >= 2, "seed {seed}");
    }
}

#[test]
fn good_shapes_sample_into_a_narrow_min_z_band() {
    // band recorded from the generator: anchor -150 with +-3 jitter, and the
    // sampled minimum sits a little above the mesh minimum
    for seed in 0..20 {
        let mesh = generate_shape(true, None, seed).unwrap();
        let cloud = sample_surface(&mesh, &SamplerConfig::new(20_000, seed).unwrap()).unwrap();
        let min_z = extract_features(&cloud).unwrap().0[2];
        assert!((-153.0..=-145.0).contains(&min_z), "seed {seed}: {min_z}");
    }
}

#[test]
fn corpus_is_reproducible_and_labelled_by_defect() {
    let mix: DefectMix = "truncate=0.4,fragment=0.3,spikes=0.15,scale=0.15".parse().unwrap();
    let a = generate_corpus(6, 10, &mix, 11).unwrap();
    let b = generate_corpus(6, 10, &mix, 11).unwrap();
    assert_eq!(CorpusManifest::from_items(11, &a), CorpusManifest::from_items(11, &b));
    assert_eq!(a.iter().filter(|i| i.label() == QualityLabel::Good).count(), 6);
    for item in &a[6..] {
        let kind = item.defect.unwrap().kind;
        let want = match kind {
            DefectKind::TruncateInferior | DefectKind::Fragment => SourceCategory::NoFullShape,
            DefectKind::Spikes => SourceCategory::RequiresEditing,
            DefectKind::ScaleAnomaly | DefectKind::SlabNonorgan => SourceCategory::NotUsable,
        };
        assert_eq!(item.category, want);
        assert_eq!(map_label(item.category), QualityLabel::Bad);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn truncation_is_monotone_in_magnitude(seed in 0u64..1000, a in 0.01f64..0.95, b in 0.01f64..0.95) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let parent = good_shape(seed);
        let min_z = |m: f64| {
            let d = DefectSpec::new(DefectKind::TruncateInferior, m, seed).unwrap();
            apply_defect(&parent, &d).unwrap().bounds().unwrap().0[2]
        };
        prop_assert!(min_z(lo) <= min_z(hi));
        prop_assert!(min_z(lo) > parent.bounds().unwrap().0[2]);
    }
}
