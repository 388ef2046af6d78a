use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::data::{sha256_hex, Dataset};
use super::metrics::{bootstrap_accuracy, evaluate, EvaluationReport};
use super::model::{train_model, ModelDocument, TrainedModel};
use super::scaler::MinMaxScaler;
use super::split::{split_indices, Split};
use crate::cml::{Classifier, ModelKind};
use crate::error::Result;
use crate::explain::{
    ale_curves, loo_importance, permutation_importance, select_background, shap_global, AleCurve, LooReport,
    PermutationReport, ShapGlobal,
};

/// Split and scaled train/test matrices shared by every model.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub split: Split,
    pub scaler: MinMaxScaler,
    pub x_train: Vec<Vec<f64>>,
    pub y_train: Vec<usize>,
    pub x_test: Vec<Vec<f64>>,
    pub y_test: Vec<usize>,
    pub feature_names: Vec<String>,
    pub class_names: Vec<String>,
}

impl Prepared {
    pub fn train(&self) -> (&[Vec<f64>], &[usize]) {
        (&self.x_train, &self.y_train)
    }

    pub fn test(&self) -> (&[Vec<f64>], &[usize]) {
        (&self.x_test, &self.y_test)
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }
}

/// Splits the dataset and fits the scaler on the training rows only.
pub fn prepare(dataset: &Dataset, config: &ExperimentConfig) -> Result<Prepared> {
    let split = split_indices(
        &dataset.labels,
        dataset.num_classes(),
        config.split.method,
        config.split.test_fraction,
        config.seed,
    )?;
    let (raw_train, y_train) = dataset.select(&split.train);
    let (raw_test, y_test) = dataset.select(&split.test);
    let mut scaler = MinMaxScaler::fit(&raw_train)?;
    scaler.clamp = config.scaler.clamp;
    Ok(Prepared {
        x_train: scaler.transform(&raw_train)?,
        x_test: scaler.transform(&raw_test)?,
        split,
        scaler,
        y_train,
        y_test,
        feature_names: dataset.feature_names.clone(),
        class_names: dataset.class_names.clone(),
    })
}

/// Envelope for every emitted JSON report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report<P> {
    pub seed: u64,
    pub config_hash: String,
    pub model: Option<ModelKind>,
    pub stage: String,
    /// Set for VQC ALE and SHAP, which go beyond the reference comparisons.
    pub extension: bool,
    pub feature_names: Vec<String>,
    pub class_names: Vec<String>,
    pub payload: P,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Ok,
    Failed,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub model: Option<ModelKind>,
    pub stage: String,
    pub status: StageStatus,
    /// Output files relative to the experiment directory, with SHA-256.
    pub files: Vec<(String, String)>,
    pub seconds: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub source: String,
    pub sha256: String,
    pub rows: usize,
    pub features: Vec<String>,
    pub classes: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub dataset: DatasetInfo,
    pub models: Vec<ModelKind>,
    pub skipped_models: Vec<ModelKind>,
    pub stages: Vec<StageRecord>,
    pub total_seconds: f64,
}

impl Manifest {
    pub fn stage(&self, model: Option<ModelKind>, stage: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.model == model && s.stage == stage)
    }

    pub fn count_ok(&self, stage: &str) -> usize {
        self.stages.iter().filter(|s| s.stage == stage && s.status == StageStatus::Ok).count()
    }
}

/// Writes files under an experiment directory and remembers their digests.
pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn new(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        std::fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn write_bytes(&self, rel: &str, bytes: &[u8]) -> Result<(String, String)> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, bytes)?;
        Ok((rel.to_string(), sha256_hex(bytes)))
    }

    pub fn write_json<S: Serialize>(&self, rel: &str, value: &S) -> Result<(String, String)> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(rel, text.as_bytes())
    }

    pub fn write_csv(&self, rel: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(String, String)> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        self.write_bytes(rel, &bytes)
    }
}

struct Ctx<'a> {
    config: &'a ExperimentConfig,
    config_hash: String,
    data: &'a Prepared,
    out: &'a OutputDir,
}

impl Ctx<'_> {
    fn report<P>(&self, model: Option<ModelKind>, stage: &str, extension: bool, payload: P) -> Report<P> {
        Report {
            seed: self.config.seed,
            config_hash: self.config_hash.clone(),
            model,
            stage: stage.into(),
            extension,
            feature_names: self.data.feature_names.clone(),
            class_names: self.data.class_names.clone(),
            payload,
        }
    }

    fn run_stage<F>(&self, model: Option<ModelKind>, stage: &str, f: F) -> StageRecord
    where
        F: FnOnce() -> Result<Vec<(String, String)>>,
    {
        let start = Instant::now();
        let outcome = f();
        let seconds = start.elapsed().as_secs_f64();
        match outcome {
            Ok(files) => StageRecord { model, stage: stage.into(), status: StageStatus::Ok, files, seconds, error: None },
            Err(e) => StageRecord {
                model,
                stage: stage.into(),
                status: StageStatus::Failed,
                files: vec![],
                seconds,
                error: Some(e.to_string()),
            },
        }
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

/// Evaluation with bootstrap, as written by `run_experiment`.
pub fn evaluate_with_bootstrap(model: &TrainedModel, data: &Prepared, resamples: usize, seed: u64) -> Result<EvaluationReport> {
    let mut report = evaluate(model, &data.x_test, &data.y_test, &data.split.test)?;
    report.bootstrap = Some(bootstrap_accuracy(&data.y_test, &report.predictions, resamples, seed)?);
    Ok(report)
}

fn evaluation_stage(ctx: &Ctx, model: &TrainedModel) -> Result<Vec<(String, String)>> {
    let kind = model.kind();
    let report = evaluate_with_bootstrap(model, ctx.data, ctx.config.explain.bootstrap_resamples, ctx.config.seed)?;
    let name = kind.name();
    let mut files = vec![ctx.out.write_json(&format!("reports/{name}/evaluation.json"), &ctx.report(Some(kind), "evaluation", false, &report))?];
    let k = ctx.data.num_classes();
    let cm: Vec<Vec<String>> = (0..k)
        .flat_map(|a| (0..k).map(move |p| (a, p)))
        .map(|(a, p)| vec![ctx.data.class_names[a].clone(), ctx.data.class_names[p].clone(), report.confusion[a][p].to_string()])
        .collect();
    files.push(ctx.out.write_csv(&format!("plots/{name}_confusion.csv"), &["actual", "predicted", "count"], &cm)?);
    if let Some(b) = &report.bootstrap {
        let rows: Vec<Vec<String>> = b.scores.iter().enumerate().map(|(i, s)| vec![i.to_string(), num(*s)]).collect();
        files.push(ctx.out.write_csv(&format!("plots/{name}_bootstrap.csv"), &["resample", "accuracy"], &rows)?);
    }
    Ok(files)
}

pub fn run_permutation(model: &TrainedModel, data: &Prepared, config: &ExperimentConfig) -> Result<PermutationReport> {
    permutation_importance(model, &data.x_test, &data.y_test, config.explain.perm_repeats, config.seed)
}

fn permutation_stage(ctx: &Ctx, model: &TrainedModel) -> Result<Vec<(String, String)>> {
    let kind = model.kind();
    let report = run_permutation(model, ctx.data, ctx.config)?;
    let rows: Vec<Vec<String>> = report
        .features
        .iter()
        .flat_map(|f| {
            f.scores.iter().enumerate().map(move |(k, s)| {
                vec![ctx.data.feature_names[f.feature].clone(), k.to_string(), num(*s), num(report.baseline - s)]
            })
        })
        .collect();
    Ok(vec![
        ctx.out.write_json(&format!("reports/{}/permutation.json", kind.name()), &ctx.report(Some(kind), "permutation", false, &report))?,
        ctx.out.write_csv(&format!("plots/{}_permutation.csv", kind.name()), &["feature", "repeat", "score", "decrease"], &rows)?,
    ])
}

pub fn run_loo(kind: ModelKind, data: &Prepared, config: &ExperimentConfig) -> Result<LooReport> {
    let k = data.num_classes();
    loo_importance(
        |xs: &[Vec<f64>], ys: &[usize]| -> Result<Box<dyn Classifier<f64>>> { Ok(Box::new(train_model(kind, config, xs, ys, k)?)) },
        data.train(),
        data.test(),
    )
}

fn loo_stage(ctx: &Ctx, kind: ModelKind) -> Result<Vec<(String, String)>> {
    let report = run_loo(kind, ctx.data, ctx.config)?;
    let mut rows = vec![vec!["(none)".to_string(), num(report.full_score), num(0.0)]];
    for e in &report.entries {
        rows.push(vec![
            ctx.data.feature_names[e.feature].clone(),
            e.score_without.map(num).unwrap_or_default(),
            e.delta.map(num).unwrap_or_default(),
        ]);
    }
    Ok(vec![
        ctx.out.write_json(&format!("reports/{}/loo.json", kind.name()), &ctx.report(Some(kind), "loo", false, &report))?,
        ctx.out.write_csv(&format!("plots/{}_loo.csv", kind.name()), &["missing_feature", "accuracy", "delta"], &rows)?,
    ])
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlePayload {
    pub intervals: usize,
    /// Per feature, the largest centered-curve range over classes.
    pub importance: Vec<f64>,
    pub curves: Vec<AleCurve<f64>>,
}

pub fn run_ale(model: &TrainedModel, data: &Prepared, intervals: usize) -> Result<AlePayload> {
    let mut curves = Vec::new();
    let mut importance = Vec::new();
    // Curves are taken over the training rows, where the feature distribution is densest.
    for j in 0..model.num_features() {
        let per_class = ale_curves(model, &data.x_train, j, intervals)?;
        importance.push(per_class.iter().map(AleCurve::spread).fold(0.0, f64::max));
        curves.extend(per_class);
    }
    Ok(AlePayload { intervals, importance, curves })
}

fn ale_stage(ctx: &Ctx, model: &TrainedModel) -> Result<Vec<(String, String)>> {
    let kind = model.kind();
    let payload = run_ale(model, ctx.data, ctx.config.explain.ale_intervals)?;
    let mut rows = Vec::new();
    for c in &payload.curves {
        for (i, z) in c.edges.iter().enumerate() {
            rows.push(vec![
                ctx.data.feature_names[c.feature].clone(),
                ctx.data.class_names[c.class].clone(),
                num(*z),
                num(c.accumulated[i]),
                num(c.centered[i]),
                if i == 0 { String::new() } else { c.counts[i - 1].to_string() },
            ]);
        }
    }
    Ok(vec![
        ctx.out.write_json(&format!("reports/{}/ale.json", kind.name()), &ctx.report(Some(kind), "ale", kind == ModelKind::Vqc, &payload))?,
        ctx.out.write_csv(
            &format!("plots/{}_ale.csv", kind.name()),
            &["feature", "class", "edge", "accumulated", "centered", "count"],
            &rows,
        )?,
    ])
}

pub fn run_shap(model: &TrainedModel, data: &Prepared, config: &ExperimentConfig) -> Result<ShapGlobal<f64>> {
    let (background, id) = select_background(&data.x_train, config.explain.shap_background, config.seed);
    shap_global(model, &data.x_test, &background, &id)
}

fn shap_stage(ctx: &Ctx, model: &TrainedModel) -> Result<Vec<(String, String)>> {
    let kind = model.kind();
    let global = run_shap(model, ctx.data, ctx.config)?;
    let mut rows = Vec::new();
    for (s, e) in global.explanations.iter().enumerate() {
        for (c, phi) in e.values.iter().enumerate() {
            for (i, v) in phi.iter().enumerate() {
                rows.push(vec![
                    s.to_string(),
                    ctx.data.split.test[s].to_string(),
                    ctx.data.class_names[c].clone(),
                    ctx.data.feature_names[i].clone(),
                    num(e.x[i]),
                    num(*v),
                    num(e.base_values[c]),
                ]);
            }
        }
    }
    let mut global_rows = Vec::new();
    for (i, name) in ctx.data.feature_names.iter().enumerate() {
        for (c, per) in global.per_class.iter().enumerate() {
            global_rows.push(vec![name.clone(), ctx.data.class_names[c].clone(), num(per[i])]);
        }
        global_rows.push(vec![name.clone(), "pooled".into(), num(global.pooled[i])]);
    }
    Ok(vec![
        ctx.out.write_json(&format!("reports/{}/shap.json", kind.name()), &ctx.report(Some(kind), "shap", kind == ModelKind::Vqc, &global))?,
        ctx.out.write_csv(
            &format!("plots/{}_shap.csv", kind.name()),
            &["position", "row", "class", "feature", "value", "phi", "base"],
            &rows,
        )?,
        ctx.out.write_csv(&format!("plots/{}_shap_global.csv", kind.name()), &["feature", "class", "mean_abs_phi"], &global_rows)?,
    ])
}

/// Trains every selected model on one split, evaluates it, runs all
/// explainers and writes reports, plot CSVs and `manifest.json` under `out`.
///
/// A failing stage is recorded in the manifest and the others still run.
pub fn run_experiment(dataset: &Dataset, config: &ExperimentConfig, out: impl AsRef<Path>) -> Result<Manifest> {
    config.validate()?;
    let start = Instant::now();
    let out = OutputDir::new(out)?;
    let data = prepare(dataset, config)?;
    let ctx = Ctx { config, config_hash: config.hash(), data: &data, out: &out };
    let mut stages = Vec::new();

    stages.push(ctx.run_stage(None, "split", || {
        Ok(vec![out.write_json("reports/split.json", &ctx.report(None, "split", false, (&data.split, &data.scaler)))?])
    }));

    let models: Vec<ModelKind> = ModelKind::ALL.into_iter().filter(|m| config.models.contains(m)).collect();
    let skipped: Vec<ModelKind> = ModelKind::ALL.into_iter().filter(|m| !config.models.contains(m)).collect();

    // Training is sequential; each model's own solver may still use all workers.
    let mut trained = Vec::new();
    for &kind in &models {
        let mut model = None;
        stages.push(ctx.run_stage(Some(kind), "train", || {
            let m = train_model(kind, config, &data.x_train, &data.y_train, data.num_classes())?;
            let doc = ModelDocument::new(m.clone(), data.scaler.clone(), config, data.feature_names.clone(), data.class_names.clone());
            let file = out.write_bytes(&format!("models/{}.json", kind.name()), doc.to_json()?.as_bytes())?;
            model = Some(m);
            Ok(vec![file])
        }));
        if let Some(m) = model {
            trained.push(m);
        }
    }

    let per_model: Vec<Vec<StageRecord>> = trained
        .par_iter()
        .map(|model| {
            let kind = Some(model.kind());
            vec![
                ctx.run_stage(kind, "evaluation", || evaluation_stage(&ctx, model)),
                ctx.run_stage(kind, "permutation", || permutation_stage(&ctx, model)),
                ctx.run_stage(kind, "loo", || loo_stage(&ctx, model.kind())),
                ctx.run_stage(kind, "ale", || ale_stage(&ctx, model)),
                ctx.run_stage(kind, "shap", || shap_stage(&ctx, model)),
            ]
        })
        .collect();
    stages.extend(per_model.into_iter().flatten());

    for &kind in &skipped {
        stages.push(StageRecord {
            model: Some(kind),
            stage: "all".into(),
            status: StageStatus::Skipped,
            files: vec![],
            seconds: 0.0,
            error: Some("model not selected".into()),
        });
    }

    let summary: Vec<Vec<String>> = models
        .iter()
        .filter_map(|&kind| {
            let path = out.path(&format!("reports/{}/evaluation.json", kind.name()));
            let text = std::fs::read_to_string(path).ok()?;
            let report: Report<EvaluationReport> = serde_json::from_str(&text).ok()?;
            let b = report.payload.bootstrap?;
            Some(vec![kind.name().to_string(), num(report.payload.accuracy), num(b.mean), num(b.p25), num(b.p75)])
        })
        .collect();
    let summary_file = out.write_csv("plots/summary.csv", &["model", "accuracy", "bootstrap_mean", "p25", "p75"], &summary)?;
    stages.push(StageRecord {
        model: None,
        stage: "summary".into(),
        status: StageStatus::Ok,
        files: vec![summary_file],
        seconds: 0.0,
        error: None,
    });

    let manifest = Manifest {
        tool: "qexplain".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: config.seed,
        config_hash: ctx.config_hash.clone(),
        config: config.clone(),
        dataset: DatasetInfo {
            source: dataset.source.clone(),
            sha256: dataset.sha256.clone(),
            rows: dataset.len(),
            features: dataset.feature_names.clone(),
            classes: dataset.class_names.clone(),
        },
        models,
        skipped_models: skipped,
        stages,
        total_seconds: start.elapsed().as_secs_f64(),
    };
    out.write_json("manifest.json", &manifest)?;
    Ok(manifest)
}
