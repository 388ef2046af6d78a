//! Experiment harness: ingestion, scaling, splitting, training, evaluation,
//! explainers and report emission.

mod config;
mod data;
mod experiment;
mod metrics;
mod model;
mod scaler;
mod split;

pub use config::{
    ExperimentConfig, ExplainSection, FeatureMapSection, OptimizerSection, QsvcSection, RfSection, ScalerSection,
    SplitSection, SvcSection, VqcSection,
};
pub use data::{bundled_iris, class_index, load_csv, parse_csv, sha256_hex, Dataset, IRIS_CLASSES, IRIS_CSV};
pub use experiment::{
    evaluate_with_bootstrap, prepare, run_ale, run_experiment, run_loo, run_permutation, run_shap, AlePayload,
    DatasetInfo, Manifest, OutputDir, Prepared, Report, StageRecord, StageStatus,
};
pub use metrics::{
    bootstrap_accuracy, evaluate, evaluate_predictions, quantile_type7, BootstrapSummary, ClassMetrics,
    EvaluationReport, Misclassification,
};
pub use model::{train_model, ModelDocument, TrainedModel, MODEL_FORMAT, MODEL_VERSION};
pub use scaler::MinMaxScaler;
pub use split::{split_indices, Split, SplitMethod};
