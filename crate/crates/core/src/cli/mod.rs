//! Command-line front end. Each subcommand is a plain function over its
//! argument struct so that it can be driven from code, from the binary, or
//! re-run from a saved [`RunManifest`].

mod manifest;

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use manifest::{manifest_path, RunManifest, RUN_MANIFEST_VERSION};
use manifest::path_string;

use crate::classifiers::{self, Hyperparameters, ModelKind, TrainedModel};
use crate::corpus::{
    self, generate_corpus, CorpusManifest, DefectMix, LabeledRow, QualityLabel, Split, SplitFractions,
};
use crate::error::{Error, Result};
use crate::explain::{self, ExplainMode};
use crate::features::{self, extract_features, FeatureRow, FeatureVector};
use crate::mesh_io::{self, CloudFormat, MeshFormat, PointCloud};
use crate::metrics::{self, AgreementReport, ModelReport, ReferenceRates};
use crate::sampler::{sample_surface, SamplerConfig, DEFAULT_POINTS};

#[derive(Debug, Parser)]
#[command(name = "shapeqc", version, about = "Shape quality screening for organ point clouds")]
pub struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Generate a labelled synthetic mesh corpus.
    Synth(SynthArgs),
    /// Sample point clouds from mesh surfaces.
    Sample(SampleArgs),
    /// Turn meshes or point clouds into the 14-feature CSV.
    Featurize(FeaturizeArgs),
    /// Write a stratified train/val/test assignment for a feature CSV.
    Split(SplitArgs),
    /// Fit one model kind, or the full suite, on the train split.
    Train(TrainArgs),
    /// Score saved models on the test split and against a reference rater.
    Eval(EvalArgs),
    /// Shapley attributions and a beeswarm summary for one model.
    Explain(ExplainArgs),
    /// Re-run a command from its run manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 500)]
    pub good: usize,
    #[arg(long, default_value_t = 500)]
    pub bad: usize,
    /// Defect weights, e.g. `truncate=0.4,fragment=0.3,spikes=0.15,scale=0.15`.
    #[arg(long, default_value = "truncate=0.4,fragment=0.3,spikes=0.15,scale=0.15")]
    pub mix: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Mesh file format: obj or off.
    #[arg(long, default_value = "obj")]
    pub format: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SampleArgs {
    /// Mesh files or directories of meshes.
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    pub points: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Point cloud format: xyz, ply or csv.
    #[arg(long, default_value = "xyz")]
    pub format: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FeaturizeArgs {
    /// Mesh or point-cloud files, or directories holding them.
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// Corpus manifest supplying labels; defaults to `manifest.json` in an input directory.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Surface samples per mesh (ignored for point-cloud inputs).
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    pub points: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output feature CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SplitArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, default_value_t = 0.80)]
    pub train: f64,
    #[arg(long, default_value_t = 0.05)]
    pub val: f64,
    #[arg(long, default_value_t = 0.15)]
    pub test: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output split CSV (`id,split`).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub split: PathBuf,
    /// Model kind or `all`.
    #[arg(long, default_value = "all")]
    pub model: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    /// Directory of model JSON files (or a single model file).
    #[arg(long)]
    pub models: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub split: PathBuf,
    /// Unlabelled feature CSV of a generated set, rated by `--reference`.
    #[arg(long)]
    pub generated: Option<PathBuf>,
    /// Reference labels `id,label` for the generated set (or the test split when no set is given).
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Name of the reference rater in the report.
    #[arg(long, default_value = "expert")]
    pub rater: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ExplainArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    /// Split CSV; the background comes from its train rows.
    #[arg(long)]
    pub split: Option<PathBuf>,
    /// `train`, `val`, `test`, `all`, or comma-separated ids.
    #[arg(long, default_value = "test")]
    pub instances: String,
    /// Upper bound on the number of explained instances (first N in file order).
    #[arg(long)]
    pub max_instances: Option<usize>,
    #[arg(long, default_value_t = 64)]
    pub background: usize,
    /// Exact enumeration over all coalitions (the default).
    #[arg(long, conflicts_with = "permutations")]
    pub exact: bool,
    /// Permutation-sampling estimate with this many permutations.
    #[arg(long)]
    pub permutations: Option<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Run manifest to replay.
    pub manifest: PathBuf,
    /// Write outputs here instead of the recorded location.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Result of one command: its manifest and any per-item failures.
#[derive(Debug)]
pub struct Outcome {
    pub manifest: RunManifest,
    pub failures: Vec<String>,
}

fn to_config<T: Serialize>(args: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(args)?)
}

fn write_file(path: &Path, contents: &str, outputs: &mut Vec<String>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))?;
    outputs.push(path_string(path));
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn create_parent(file: &Path) -> Result<()> {
    match file.parent() {
        Some(p) if !p.as_os_str().is_empty() => create_dir(p),
        _ => Ok(()),
    }
}

fn finish(mut manifest: RunManifest, out: &Path, out_is_dir: bool, failures: Vec<String>) -> Result<Outcome> {
    manifest.outputs.sort();
    manifest.save(&manifest_path(out, out_is_dir))?;
    Ok(Outcome { manifest, failures })
}

fn file_stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Files under each input (directories are listed one level deep, sorted),
/// keeping those accepted by `keep`.
fn expand_inputs(inputs: &[PathBuf], keep: impl Fn(&Path) -> bool) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && keep(f))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn is_mesh(p: &Path) -> bool {
    MeshFormat::from_path(p).is_ok()
}

fn is_cloud(p: &Path) -> bool {
    CloudFormat::from_path(p).is_ok()
}

pub fn cmd_synth(args: &SynthArgs) -> Result<Outcome> {
    let mix: DefectMix = args.mix.parse()?;
    let format: MeshFormat = args.format.parse()?;
    let mut manifest = RunManifest::new("synth", args.seed, to_config(args)?);
    let items = generate_corpus(args.good, args.bad, &mix, args.seed)?;
    let mesh_dir = args.out.join("meshes");
    create_dir(&mesh_dir)?;
    let mut corpus_manifest = CorpusManifest::from_items(args.seed, &items);
    let written: Vec<PathBuf> = items
        .par_iter()
        .map(|it| {
            let path = mesh_dir.join(format!("{}.{}", it.id, format.extension()));
            mesh_io::save_mesh(&it.mesh, &path, format)?;
            Ok(path)
        })
        .collect::<Result<_>>()?;
    for (entry, path) in corpus_manifest.items.iter_mut().zip(&written) {
        entry.mesh_path = Some(format!("meshes/{}", path.file_name().unwrap().to_string_lossy()));
        manifest.outputs.push(path_string(path));
    }
    let cm_path = args.out.join("manifest.json");
    corpus_manifest.save(&cm_path)?;
    manifest.outputs.push(path_string(&cm_path));
    let mut labels = String::from("id,label\n");
    for it in &items {
        labels.push_str(&format!("{},{}\n", it.id, it.label()));
    }
    write_file(&args.out.join("labels.csv"), &labels, &mut manifest.outputs)?;
    log::info!("synth: {} meshes in {}", items.len(), mesh_dir.display());
    finish(manifest, &args.out, true, Vec::new())
}

pub fn cmd_sample(args: &SampleArgs) -> Result<Outcome> {
    let format: CloudFormat = args.format.parse()?;
    SamplerConfig::new(args.points, args.seed)?;
    let mut manifest = RunManifest::new("sample", args.seed, to_config(args)?);
    let files = expand_inputs(&args.input, is_mesh)?;
    create_dir(&args.out)?;
    let results: Vec<(PathBuf, Result<PathBuf>)> = files
        .par_iter()
        .map(|f| {
            let run = || {
                let mesh = mesh_io::load_mesh(f, MeshFormat::from_path(f)?)?;
                let id = file_stem(f);
                let cfg = SamplerConfig::new(args.points, corpus::cloud_seed(args.seed, &id))?;
                let cloud = sample_surface(&mesh, &cfg)?;
                let path = args.out.join(format!("{id}.{}", format.extension()));
                mesh_io::save_point_cloud(&cloud, &path, format)?;
                Ok(path)
            };
            (f.clone(), run())
        })
        .collect();
    let mut failures = Vec::new();
    for (f, r) in results {
        manifest.inputs.push(path_string(&f));
        match r {
            Ok(p) => manifest.outputs.push(path_string(&p)),
            Err(e) => failures.push(format!("{}: {e}", f.display())),
        }
    }
    finish(manifest, &args.out, true, failures)
}

fn features_of(path: &Path, points: usize, seed: u64) -> Result<FeatureVector> {
    let id = file_stem(path);
    let cloud: PointCloud = if is_mesh(path) {
        let mesh = mesh_io::load_mesh(path, MeshFormat::from_path(path)?)?;
        sample_surface(&mesh, &SamplerConfig::new(points, corpus::cloud_seed(seed, &id))?)?
    } else {
        mesh_io::load_point_cloud(path, CloudFormat::from_path(path)?)?
    };
    extract_features(&cloud)
}

pub fn cmd_featurize(args: &FeaturizeArgs) -> Result<Outcome> {
    SamplerConfig::new(args.points, args.seed)?;
    let mut manifest = RunManifest::new("featurize", args.seed, to_config(args)?);
    let manifest_file = args.manifest.clone().or_else(|| {
        args.input
            .iter()
            .map(|p| p.join("manifest.json"))
            .find(|p| p.is_file())
    });
    let labels: HashMap<String, QualityLabel> = match &manifest_file {
        Some(p) => {
            manifest.inputs.push(path_string(p));
            CorpusManifest::load(p)?
                .items
                .into_iter()
                .map(|it| (it.id, it.label))
                .collect()
        }
        None => HashMap::new(),
    };
    // synth writes meshes to a `meshes/` subdirectory
    let inputs: Vec<PathBuf> = args
        .input
        .iter()
        .map(|p| {
            let sub = p.join("meshes");
            if p.is_dir() && sub.is_dir() {
                sub
            } else {
                p.clone()
            }
        })
        .collect();
    let files = expand_inputs(&inputs, |p| is_mesh(p) || is_cloud(p))?;
    let results: Vec<Result<FeatureVector>> = files
        .par_iter()
        .map(|f| features_of(f, args.points, args.seed))
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (f, r) in files.iter().zip(results) {
        manifest.inputs.push(path_string(f));
        match r {
            Ok(features) => {
                let id = file_stem(f);
                rows.push(FeatureRow {
                    label: labels.get(&id).copied(),
                    id,
                    features,
                })
            }
            Err(e) => failures.push(format!("{}: {e}", f.display())),
        }
    }
    create_parent(&args.out)?;
    write_file(&args.out, &features::write_feature_csv(&rows), &mut manifest.outputs)?;
    finish(manifest, &args.out, false, failures)
}

fn load_labeled(path: &Path) -> Result<Vec<LabeledRow>> {
    features::load_feature_csv(path)?
        .into_iter()
        .map(LabeledRow::try_from)
        .collect()
}

pub fn cmd_split(args: &SplitArgs) -> Result<Outcome> {
    let mut manifest = RunManifest::new("split", args.seed, to_config(args)?);
    manifest.inputs.push(path_string(&args.features));
    let rows = load_labeled(&args.features)?;
    let fractions = SplitFractions::new(args.train, args.val, args.test)?;
    let ds = corpus::split_dataset(rows, fractions, args.seed)?;
    create_parent(&args.out)?;
    write_file(&args.out, &ds.split_csv(), &mut manifest.outputs)?;
    finish(manifest, &args.out, false, Vec::new())
}

fn load_dataset(features: &Path, split: &Path) -> Result<corpus::LabeledDataset> {
    let rows = load_labeled(features)?;
    let text = fs::read_to_string(split).map_err(|e| Error::io(split, e))?;
    corpus::apply_split(rows, &corpus::parse_split_csv(&text)?)
}

fn parse_kinds(spec: &str) -> Result<Vec<ModelKind>> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok(ModelKind::ALL.to_vec());
    }
    spec.split(',').map(str::parse).collect()
}

pub fn cmd_train(args: &TrainArgs) -> Result<Outcome> {
    let kinds = parse_kinds(&args.model)?;
    let mut manifest = RunManifest::new("train", args.seed, to_config(args)?);
    manifest.inputs.extend([path_string(&args.features), path_string(&args.split)]);
    let ds = load_dataset(&args.features, &args.split)?;
    let train: Vec<(FeatureVector, QualityLabel)> = ds.train().iter().map(|r| (r.features, r.label)).collect();
    let hyper = Hyperparameters::default();
    manifest.config["hyperparameters"] = serde_json::to_value(&hyper)?;
    create_dir(&args.out)?;
    for kind in kinds {
        let started = std::time::Instant::now();
        let model = classifiers::fit(kind, &train, &hyper, args.seed)?;
        log::info!("train: {kind} in {:.2?}", started.elapsed());
        let path = args.out.join(format!("{kind}.json"));
        write_file(&path, &model.to_json()?, &mut manifest.outputs)?;
    }
    finish(manifest, &args.out, true, Vec::new())
}

fn load_models(path: &Path) -> Result<Vec<TrainedModel>> {
    let files = if path.is_dir() {
        expand_inputs(&[path.to_path_buf()], |p| {
            p.extension().is_some_and(|e| e == "json") && file_stem(p).parse::<ModelKind>().is_ok()
        })?
    } else {
        vec![path.to_path_buf()]
    };
    let mut models = files
        .iter()
        .map(|f| classifiers::load_model(f))
        .collect::<Result<Vec<_>>>()?;
    if models.is_empty() {
        return Err(Error::InvalidSpec(format!("no model files in {}", path.display())));
    }
    models.sort_by_key(|m| m.kind);
    Ok(models)
}

/// Reads `id,label` rows.
pub fn parse_label_csv(text: &str) -> Result<Vec<(String, QualityLabel)>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let (Some(ic), Some(lc)) = (
        cols.iter().position(|c| *c == "id"),
        cols.iter().position(|c| *c == "label"),
    ) else {
        return Err(Error::parse(1, "header must contain `id` and `label`"));
    };
    lines
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let (Some(id), Some(label)) = (f.get(ic), f.get(lc)) else {
                return Err(Error::parse(i + 1, "missing field"));
            };
            let label = label.parse().map_err(|_| Error::parse(i + 1, format!("bad label {label:?}")))?;
            Ok((id.to_string(), label))
        })
        .collect()
}

pub fn cmd_eval(args: &EvalArgs) -> Result<Outcome> {
    let mut manifest = RunManifest::new("eval", 0, to_config(args)?);
    manifest.inputs.extend([path_string(&args.models), path_string(&args.features), path_string(&args.split)]);
    let models = load_models(&args.models)?;
    manifest.master_seed = models[0].seed;
    let ds = load_dataset(&args.features, &args.split)?;
    let test = ds.test();
    let test_x: Vec<FeatureVector> = test.iter().map(|r| r.features).collect();
    let truth: Vec<QualityLabel> = test.iter().map(|r| r.label).collect();

    // the set rated by the reference: a generated set, else the test split
    let rated: Option<(Vec<String>, Vec<FeatureVector>)> = match &args.generated {
        Some(p) => {
            manifest.inputs.push(path_string(p));
            let rows = features::load_feature_csv(p)?;
            Some((rows.iter().map(|r| r.id.clone()).collect(), rows.iter().map(|r| r.features).collect()))
        }
        None => args
            .reference
            .as_ref()
            .map(|_| (test.iter().map(|r| r.id.clone()).collect(), test_x.clone())),
    };
    let reference: Option<Vec<QualityLabel>> = match (&args.reference, &rated) {
        (Some(p), Some((ids, _))) => {
            manifest.inputs.push(path_string(p));
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            let entries = parse_label_csv(&text)?;
            let map: HashMap<&str, QualityLabel> = entries.iter().map(|(i, l)| (i.as_str(), *l)).collect();
            let matched: Vec<QualityLabel> = ids.iter().filter_map(|id| map.get(id.as_str()).copied()).collect();
            if matched.len() != ids.len() || entries.len() != ids.len() {
                return Err(Error::LengthMismatch {
                    left: entries.len(),
                    right: ids.len(),
                });
            }
            Some(matched)
        }
        _ => None,
    };

    let mut report = AgreementReport::default();
    if let Some(r) = &reference {
        let (g, b) = metrics::prediction_rates(r)?;
        report.reference = Some(ReferenceRates {
            rater: args.rater.clone(),
            good_pct: g,
            bad_pct: b,
        });
    }
    for m in &models {
        let pred: Vec<QualityLabel> = classifiers::predict_batch(m, &test_x).iter().map(|p| p.label).collect();
        let mut row = if truth.is_empty() {
            ModelReport::empty(m.kind.as_str())
        } else {
            ModelReport::with_test(m.kind.as_str(), &truth, &pred)?
        };
        if let (Some(r), Some((_, xs))) = (&reference, &rated) {
            let gen_pred: Vec<QualityLabel> = classifiers::predict_batch(m, xs).iter().map(|p| p.label).collect();
            row.set_agreement(r, &gen_pred)?;
        }
        report.models.push(row);
    }
    create_dir(&args.out)?;
    write_file(&args.out.join("report.csv"), &report.to_csv(), &mut manifest.outputs)?;
    write_file(&args.out.join("report.json"), &report.to_json()?, &mut manifest.outputs)?;
    let text = report.to_text();
    write_file(&args.out.join("report.txt"), &text, &mut manifest.outputs)?;
    print!("{text}");
    finish(manifest, &args.out, true, Vec::new())
}

pub fn cmd_explain(args: &ExplainArgs) -> Result<Outcome> {
    let mut manifest = RunManifest::new("explain", args.seed, to_config(args)?);
    manifest.inputs.extend([path_string(&args.model), path_string(&args.features)]);
    let model = classifiers::load_model(&args.model)?;
    let rows = features::load_feature_csv(&args.features)?;
    let split: Option<HashMap<String, Split>> = match &args.split {
        Some(p) => {
            manifest.inputs.push(path_string(p));
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Some(corpus::parse_split_csv(&text)?.into_iter().collect())
        }
        None => None,
    };
    let split_of = |id: &str| split.as_ref().and_then(|s| s.get(id).copied());

    let bg_pool: Vec<[f64; 14]> = rows
        .iter()
        .filter(|r| split.is_none() || split_of(&r.id) == Some(Split::Train))
        .map(|r| r.features.0)
        .collect();
    let background = explain::select_background(&bg_pool, args.background.max(1), args.seed);
    if background.is_empty() {
        return Err(Error::InvalidSpec("no rows available for the background set".into()));
    }

    let wanted: Box<dyn Fn(&FeatureRow) -> bool> = match args.instances.trim() {
        "all" => Box::new(|_| true),
        s @ ("train" | "val" | "test") => {
            let which: Split = s.parse()?;
            if split.is_none() {
                Box::new(|_| true)
            } else {
                Box::new(move |r| split_of(&r.id) == Some(which))
            }
        }
        ids => {
            let set: std::collections::HashSet<String> = ids.split(',').map(|s| s.trim().to_string()).collect();
            let missing: Vec<&String> = set.iter().filter(|id| !rows.iter().any(|r| &&r.id == id)).collect();
            if !missing.is_empty() {
                return Err(Error::InvalidSpec(format!("unknown instance ids: {missing:?}")));
            }
            Box::new(move |r| set.contains(&r.id))
        }
    };
    let chosen: Vec<&FeatureRow> = rows
        .iter()
        .filter(|r| wanted(r))
        .take(args.max_instances.unwrap_or(usize::MAX))
        .collect();
    if chosen.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let mode = match args.permutations {
        Some(n) => ExplainMode::Sampled {
            permutations: n,
            seed: args.seed,
        },
        None => ExplainMode::Exact,
    };
    if mode == ExplainMode::Exact && matches!(model.kind, ModelKind::Mlp | ModelKind::Svm | ModelKind::Knn) {
        log::warn!(
            "exact mode on {}: {} instances x {} background rows x 16384 coalitions may be slow",
            model.kind,
            chosen.len(),
            background.len()
        );
    }
    manifest.config["mode"] = serde_json::to_value(mode)?;
    manifest.config["background_rows"] = background.len().into();

    let instances: Vec<(String, [f64; 14])> = chosen.iter().map(|r| (r.id.clone(), r.features.0)).collect();
    let attributions = explain::explain_all(&model, &instances, &background, mode)?;
    let feats: Vec<FeatureVector> = chosen.iter().map(|r| r.features).collect();
    let summary = explain::summary_table(&attributions, &feats)?;

    create_dir(&args.out)?;
    write_file(
        &args.out.join("attributions.csv"),
        &explain::write_attribution_csv(&attributions),
        &mut manifest.outputs,
    )?;
    write_file(&args.out.join("importance.csv"), &summary.importance_csv(), &mut manifest.outputs)?;
    let svg = args.out.join("beeswarm.svg");
    let csv = explain::render_beeswarm(&summary, &svg)?;
    manifest.outputs.extend([path_string(&svg), path_string(&csv)]);
    let worst = attributions.iter().map(|a| a.efficiency_gap().abs()).fold(0.0, f64::max);
    println!(
        "explained {} instances; top features: {}; max efficiency gap {worst:.2e}",
        attributions.len(),
        summary.ranking()[..3].join(", ")
    );
    finish(manifest, &args.out, true, Vec::new())
}

/// Re-runs the command recorded in a run manifest, optionally into a new location.
pub fn cmd_replay(args: &ReplayArgs) -> Result<Outcome> {
    let recorded = RunManifest::load(&args.manifest)?;
    let mut config = recorded.config.clone();
    if let Some(obj) = config.as_object_mut() {
        // annotations added after argument parsing are not arguments
        for extra in ["hyperparameters", "mode", "background_rows"] {
            obj.remove(extra);
        }
        if let Some(out) = &args.out {
            obj.insert("out".into(), serde_json::Value::String(path_string(out)));
        }
    }
    let command = match recorded.command.as_str() {
        "synth" => Command::Synth(serde_json::from_value(config)?),
        "sample" => Command::Sample(serde_json::from_value(config)?),
        "featurize" => Command::Featurize(serde_json::from_value(config)?),
        "split" => Command::Split(serde_json::from_value(config)?),
        "train" => Command::Train(serde_json::from_value(config)?),
        "eval" => Command::Eval(serde_json::from_value(config)?),
        "explain" => Command::Explain(serde_json::from_value(config)?),
        other => return Err(Error::InvalidSpec(format!("cannot replay command `{other}`"))),
    };
    run(&command)
}

pub fn run(command: &Command) -> Result<Outcome> {
    match command {
        Command::Synth(a) => cmd_synth(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Featurize(a) => cmd_featurize(a),
        Command::Split(a) => cmd_split(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Explain(a) => cmd_explain(a),
        Command::Replay(a) => cmd_replay(a),
    }
}

fn init_threads() {
    if let Some(n) = std::env::var("SHAPEQC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Entry point for the binary; returns the process exit code
/// (0 success, 1 runtime failure, 2 usage error).
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
    init_threads();
    match run(&cli.command) {
        Ok(outcome) if outcome.failures.is_empty() => {
            log::info!("{}: wrote {} outputs", outcome.manifest.command, outcome.manifest.outputs.len());
            0
        }
        Ok(outcome) => {
            eprintln!("{} item(s) failed:", outcome.failures.len());
            for f in &outcome.failures {
                eprintln!("  {f}");
            }
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
