//! Synthesises a 500/500 corpus, splits it 80/5/15 and trains the full
//! ten-model suite, printing test accuracy and F1 per model.
//!
//! cargo run --release --example train_suite -- [n_good n_bad seed]

use std::time::Instant;

use shapeqc::classifiers::{fit, predict_batch, Hyperparameters, ModelKind};
use shapeqc::corpus::{featurize_items, generate_corpus, split_dataset, DefectMix, SplitFractions};
use shapeqc::metrics::{AgreementReport, ModelReport};
use shapeqc::sampler::DEFAULT_POINTS;

fn main() -> shapeqc::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (n_good, n_bad, seed) = match args[..] {
        [g, b, s, ..] => (g as usize, b as usize, s),
        _ => (500, 500, 42),
    };

    let t0 = Instant::now();
    let items = generate_corpus(n_good, n_bad, &DefectMix::default(), seed)?;
    let rows = featurize_items(&items, DEFAULT_POINTS, seed)?;
    let ds = split_dataset(rows, SplitFractions::default(), seed)?;
    println!("corpus + features: {:.2?}", t0.elapsed());

    let train: Vec<_> = ds.train().iter().map(|r| (r.features, r.label)).collect();
    let test = ds.test();
    let xs: Vec<_> = test.iter().map(|r| r.features).collect();
    let truth: Vec<_> = test.iter().map(|r| r.label).collect();

    let hyper = Hyperparameters::default();
    let mut report = AgreementReport::default();
    let t1 = Instant::now();
    for kind in ModelKind::ALL {
        let t = Instant::now();
        let model = fit(kind, &train, &hyper, seed)?;
        let pred: Vec<_> = predict_batch(&model, &xs).iter().map(|p| p.label).collect();
        report.models.push(ModelReport::with_test(kind.as_str(), &truth, &pred)?);
        eprintln!("{kind:>20}: {:.2?}", t.elapsed());
    }
    println!("train + eval: {:.2?} ({} train / {} test rows)", t1.elapsed(), train.len(), xs.len());
    print!("{}", report.to_text());
    Ok(())
}
