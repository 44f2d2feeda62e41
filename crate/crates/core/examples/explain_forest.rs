//! Trains a random forest on a corpus whose only defect is inferior
//! truncation, explains the test split exactly and writes the beeswarm plot.
//!
//! cargo run --release --example explain_forest -- [out_dir]

use std::path::PathBuf;

use shapeqc::classifiers::{fit, Hyperparameters, ModelKind};
use shapeqc::corpus::{featurize_items, generate_corpus, split_dataset, DefectKind, DefectMix, SplitFractions};
use shapeqc::explain::{explain_all, render_beeswarm, select_background, summary_table, ExplainMode};

fn main() -> shapeqc::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let seed = 3;
    let items = generate_corpus(120, 120, &DefectMix::only(DefectKind::TruncateInferior), seed)?;
    let ds = split_dataset(featurize_items(&items, 5000, seed)?, SplitFractions::default(), seed)?;
    let train: Vec<_> = ds.train().iter().map(|r| (r.features, r.label)).collect();
    let model = fit(ModelKind::RandomForest, &train, &Hyperparameters::default(), seed)?;

    let bg_rows: Vec<_> = train.iter().map(|(x, _)| x.0).collect();
    let bg = select_background(&bg_rows, 32, seed);
    let test = ds.test();
    let instances: Vec<_> = test.iter().map(|r| (r.id.clone(), r.features.0)).collect();
    let attributions = explain_all(&model, &instances, &bg, ExplainMode::Exact)?;
    let worst = attributions.iter().map(|a| a.efficiency_gap().abs()).fold(0.0, f64::max);
    println!("{} instances, largest efficiency gap {worst:e}", attributions.len());

    let features: Vec<_> = test.iter().map(|r| r.features).collect();
    let summary = summary_table(&attributions, &features)?;
    print!("{}", summary.importance_csv());
    let svg = out.join("truncation_beeswarm.svg");
    let csv = render_beeswarm(&summary, &svg)?;
    println!("wrote {} and {}", svg.display(), csv.display());
    Ok(())
}
