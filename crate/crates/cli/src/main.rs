use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qexplain::cml::{Classifier, ModelKind};
use qexplain::encode::FeatureMapSpec;
use qexplain::pipeline::{
    bundled_iris, evaluate_with_bootstrap, load_csv, prepare, run_ale, run_experiment, run_loo, run_permutation,
    run_shap, train_model, Dataset, ExperimentConfig, ModelDocument, OutputDir, Prepared, SplitMethod,
};
use qexplain::qkernel::gram_matrix;
use qexplain::vqc::{grid_search, write_grid_csv, AnsatzKind, OptimizerConfig, Readout};

#[derive(Parser)]
#[command(name = "qexplain", version, about = "Classical and quantum-simulated classifiers with feature-importance explainers")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// CSV with a header row and the species label in the last column (default: bundled Iris).
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for the split, model initialisation and explainers.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma-separated subset of svc,qsvc,rf,vqc.
    #[arg(long, global = true, value_delimiter = ',')]
    models: Option<Vec<ModelKind>>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Split method: stratified or shuffle.
    #[arg(long, global = true)]
    split: Option<SplitMethod>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the selected models and save them under <out>/models.
    Train,
    /// Evaluate a saved model on the test split.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Run the explainers for a saved model.
    Explain {
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated subset of loo,permutation,ale,shap.
        #[arg(long, value_delimiter = ',', default_value = "loo,permutation,ale,shap")]
        methods: Vec<String>,
    },
    /// Export the quantum kernel Gram matrix of the training split.
    Kernel,
    /// Grid search over VQC ansatz and repetitions.
    Gridsearch {
        #[arg(long, default_value_t = 1)]
        reps_min: usize,
        #[arg(long, default_value_t = 4)]
        reps_max: usize,
    },
    /// Train, evaluate and explain every selected model.
    RunAll,
}

fn load_config(g: &Global) -> Result<ExperimentConfig> {
    let mut config = match &g.config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
        None => ExperimentConfig::new(),
    };
    if let Some(seed) = g.seed {
        config.seed = seed;
    }
    if let Some(models) = &g.models {
        config.models = models.clone();
    }
    if let Some(split) = g.split {
        config.split.method = split;
    }
    config.validate()?;
    Ok(config)
}

fn load_data(g: &Global) -> Result<Dataset> {
    match &g.data {
        Some(path) => load_csv(path).with_context(|| format!("loading {}", path.display())),
        None => Ok(bundled_iris()),
    }
}

/// Split from the command line, rescaled with the scaler stored in `doc`.
fn prepared_for(doc: &ModelDocument, data: &Dataset, config: &ExperimentConfig) -> Result<Prepared> {
    let mut prepared = prepare(data, config)?;
    let (raw_train, _) = data.select(&prepared.split.train);
    let (raw_test, _) = data.select(&prepared.split.test);
    prepared.x_train = doc.scaler.transform(&raw_train)?;
    prepared.x_test = doc.scaler.transform(&raw_test)?;
    prepared.scaler = doc.scaler.clone();
    if doc.model.num_features() != data.num_features() {
        bail!("model expects {} features, data has {}", doc.model.num_features(), data.num_features());
    }
    Ok(prepared)
}

fn write_json<S: serde::Serialize>(out: &OutputDir, rel: &str, value: &S) -> Result<()> {
    let (file, _) = out.write_json(rel, value)?;
    println!("wrote {}", out.path(&file).display());
    Ok(())
}

fn train(g: &Global, config: &ExperimentConfig) -> Result<()> {
    let data = load_data(g)?;
    let prepared = prepare(&data, config)?;
    let out = OutputDir::new(&g.out)?;
    for &kind in &config.models {
        let model = train_model(kind, config, &prepared.x_train, &prepared.y_train, prepared.num_classes())?;
        let acc = qexplain::cml::accuracy(&model, &prepared.x_test, &prepared.y_test)?;
        let doc = ModelDocument::new(model, prepared.scaler.clone(), config, data.feature_names.clone(), data.class_names.clone());
        let (file, _) = out.write_bytes(&format!("models/{}.json", kind.name()), doc.to_json()?.as_bytes())?;
        println!("{:<5} test accuracy {acc:.4}  -> {}", kind.name(), out.path(&file).display());
    }
    Ok(())
}

fn evaluate(g: &Global, config: &ExperimentConfig, model: &Path) -> Result<()> {
    let doc = ModelDocument::load(model).with_context(|| format!("loading {}", model.display()))?;
    let data = load_data(g)?;
    let prepared = prepared_for(&doc, &data, config)?;
    let report = evaluate_with_bootstrap(&doc.model, &prepared, config.explain.bootstrap_resamples, config.seed)?;
    let kind = doc.model.kind();
    println!("{} accuracy {:.4}", kind.name(), report.accuracy);
    for (c, m) in report.per_class.iter().enumerate() {
        println!(
            "  {:<12} precision {:.3} recall {:.3} f1 {:.3} support {}",
            data.class_names[c], m.precision, m.recall, m.f1, m.support
        );
    }
    if let Some(b) = &report.bootstrap {
        println!("  bootstrap mean {:.4} (25% {:.4}, 75% {:.4})", b.mean, b.p25, b.p75);
    }
    write_json(&OutputDir::new(&g.out)?, &format!("reports/{}/evaluation.json", kind.name()), &report)
}

fn explain(g: &Global, config: &ExperimentConfig, model: &Path, methods: &[String]) -> Result<()> {
    let doc = ModelDocument::load(model).with_context(|| format!("loading {}", model.display()))?;
    let data = load_data(g)?;
    let prepared = prepared_for(&doc, &data, config)?;
    let out = OutputDir::new(&g.out)?;
    let kind = doc.model.kind();
    let name = kind.name();
    for method in methods {
        match method.as_str() {
            "loo" => write_json(&out, &format!("reports/{name}/loo.json"), &run_loo(kind, &prepared, config)?)?,
            "permutation" => {
                let report = run_permutation(&doc.model, &prepared, config)?;
                for f in &report.features {
                    println!("  {:<14} importance {:+.4} ± {:.4}", data.feature_names[f.feature], f.importance, f.std);
                }
                write_json(&out, &format!("reports/{name}/permutation.json"), &report)?;
            }
            "ale" => write_json(&out, &format!("reports/{name}/ale.json"), &run_ale(&doc.model, &prepared, config.explain.ale_intervals)?)?,
            "shap" => write_json(&out, &format!("reports/{name}/shap.json"), &run_shap(&doc.model, &prepared, config)?)?,
            other => bail!("unknown explainer {other:?} (expected loo, permutation, ale or shap)"),
        }
    }
    Ok(())
}

fn kernel(g: &Global, config: &ExperimentConfig) -> Result<()> {
    let data = load_data(g)?;
    let prepared = prepare(&data, config)?;
    let fm = &config.qsvc.featuremap;
    let spec = FeatureMapSpec::new(data.num_features(), fm.reps, fm.entanglement)?;
    let gram = gram_matrix(&spec, &prepared.x_train)?;
    let out = OutputDir::new(&g.out)?;
    let path = out.path("kernel.csv");
    gram.write_csv(std::fs::File::create(&path)?)?;
    let min_eigenvalue = gram.min_eigenvalue()?;
    let summary = serde_json::json!({
        "seed": config.seed,
        "config_hash": config.hash(),
        "size": prepared.x_train.len(),
        "max_asymmetry": gram.max_asymmetry(),
        "min_eigenvalue": min_eigenvalue,
    });
    println!("{}x{} kernel -> {}", prepared.x_train.len(), prepared.x_train.len(), path.display());
    println!("  max asymmetry {:e}, min eigenvalue {:e}", gram.max_asymmetry(), min_eigenvalue);
    write_json(&out, "kernel.json", &summary)
}

fn gridsearch(g: &Global, config: &ExperimentConfig, reps_min: usize, reps_max: usize) -> Result<()> {
    if reps_min == 0 || reps_max < reps_min {
        bail!("need 1 <= reps-min <= reps-max");
    }
    let data = load_data(g)?;
    let prepared = prepare(&data, config)?;
    let p = data.num_features();
    let fm = &config.vqc.featuremap;
    let feature_map = FeatureMapSpec::new(p, fm.reps, fm.entanglement)?;
    let o = &config.vqc.optimizer;
    let optimizer = OptimizerConfig {
        kind: o.kind,
        max_iters: o.max_iters,
        initial_trust_radius: o.initial_trust_radius,
        final_trust_radius: o.final_trust_radius,
        seed: config.seed,
    };
    let rows = grid_search(
        feature_map,
        &AnsatzKind::ALL,
        reps_min..=reps_max,
        &[optimizer],
        config.vqc.entanglement,
        &Readout::modulo(p, prepared.num_classes())?,
        prepared.train(),
        prepared.test(),
        config.seed,
    );
    for r in &rows {
        match r.accuracy {
            Some(a) => println!("{:<14} reps {} {:<7} accuracy {a:.4} ({:.1}s)", r.ansatz.name(), r.reps, r.optimizer, r.seconds),
            None => println!("{:<14} reps {} {:<7} failed: {}", r.ansatz.name(), r.reps, r.optimizer, r.error.as_deref().unwrap_or("")),
        }
    }
    let out = OutputDir::new(&g.out)?;
    let path = out.path("grid.csv");
    write_grid_csv(&rows, std::fs::File::create(&path)?)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run_all(g: &Global, config: &ExperimentConfig) -> Result<()> {
    let data = load_data(g)?;
    let manifest = run_experiment(&data, config, &g.out)?;
    for stage in &manifest.stages {
        let model = stage.model.map_or("-", |m| m.name());
        match &stage.error {
            Some(e) => println!("{model:<5} {:<12} {:?}: {e}", stage.stage, stage.status),
            None => println!("{model:<5} {:<12} ok ({:.2}s)", stage.stage, stage.seconds),
        }
    }
    println!("manifest: {}", g.out.join("manifest.json").display());
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let g = &cli.global;
    if let Some(n) = g.workers {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker threads")?;
    }
    let config = load_config(g)?;
    match &cli.command {
        Command::Train => train(g, &config),
        Command::Evaluate { model } => evaluate(g, &config, model),
        Command::Explain { model, methods } => explain(g, &config, model, methods),
        Command::Kernel => kernel(g, &config),
        Command::Gridsearch { reps_min, reps_max } => gridsearch(g, &config, *reps_min, *reps_max),
        Command::RunAll => run_all(g, &config),
    }
}
