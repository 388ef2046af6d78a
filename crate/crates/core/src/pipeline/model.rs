use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::scaler::MinMaxScaler;
use crate::cml::{forest_fit, gamma_scale, Classifier, ForestConfig, ModelKind, RandomForest, SvmClassifier, SvmConfig, SvmKernel};
use crate::encode::FeatureMapSpec;
use crate::error::{Error, Result};
use crate::vqc::{vqc_train, AnsatzSpec, OptimizerConfig, Readout, VqcModel};

pub const MODEL_FORMAT: &str = "qexplain-model";
pub const MODEL_VERSION: u32 = 1;

/// Any of the four trained classifiers.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum TrainedModel {
    Svc(SvmClassifier<f64>),
    Qsvc(SvmClassifier<f64>),
    Rf(RandomForest<f64>),
    Vqc(VqcModel<f64>),
}

impl TrainedModel {
    fn inner(&self) -> &dyn Classifier<f64> {
        match self {
            Self::Svc(m) | Self::Qsvc(m) => m,
            Self::Rf(m) => m,
            Self::Vqc(m) => m,
        }
    }
}

impl Classifier<f64> for TrainedModel {
    fn kind(&self) -> ModelKind {
        match self {
            Self::Svc(_) => ModelKind::Svc,
            Self::Qsvc(_) => ModelKind::Qsvc,
            Self::Rf(_) => ModelKind::Rf,
            Self::Vqc(_) => ModelKind::Vqc,
        }
    }
    fn num_classes(&self) -> usize {
        self.inner().num_classes()
    }
    fn num_features(&self) -> usize {
        self.inner().num_features()
    }
    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.inner().predict_proba(x)
    }
    fn predict(&self, x: &[f64]) -> Result<usize> {
        self.inner().predict(x)
    }
}

/// Trains `kind` on scaled rows with the hyperparameters in `config`.
/// The feature and qubit counts follow the data, so this also serves
/// leave-one-out retraining.
pub fn train_model(kind: ModelKind, config: &ExperimentConfig, xs: &[Vec<f64>], ys: &[usize], num_classes: usize) -> Result<TrainedModel> {
    let p = xs.first().map_or(0, Vec::len);
    match kind {
        ModelKind::Svc => {
            let gamma = config.svc.gamma.unwrap_or_else(|| gamma_scale(xs));
            if !(gamma.is_finite() && gamma > 0.0) {
                return Err(Error::Degenerate("training features have zero variance".into()));
            }
            let svm = SvmConfig { c: config.svc.c, ..SvmConfig::default() };
            Ok(TrainedModel::Svc(SvmClassifier::fit(SvmKernel::Rbf { gamma }, xs, ys, num_classes, svm)?))
        }
        ModelKind::Qsvc => {
            let fm = &config.qsvc.featuremap;
            let feature_map = FeatureMapSpec::new(p, fm.reps, fm.entanglement)?;
            let svm = SvmConfig { c: config.qsvc.c, ..SvmConfig::default() };
            Ok(TrainedModel::Qsvc(SvmClassifier::fit(SvmKernel::Quantum { feature_map }, xs, ys, num_classes, svm)?))
        }
        ModelKind::Rf => {
            let forest = ForestConfig {
                trees: config.rf.trees,
                min_leaf: config.rf.min_leaf,
                seed: config.seed,
                ..ForestConfig::default()
            };
            Ok(TrainedModel::Rf(forest_fit(xs, ys, num_classes, forest)?))
        }
        ModelKind::Vqc => {
            let v = &config.vqc;
            let feature_map = FeatureMapSpec::new(p, v.featuremap.reps, v.featuremap.entanglement)?;
            let ansatz = AnsatzSpec::new(v.ansatz, p, v.reps, v.entanglement)?;
            let optimizer = OptimizerConfig {
                kind: v.optimizer.kind,
                max_iters: v.optimizer.max_iters,
                initial_trust_radius: v.optimizer.initial_trust_radius,
                final_trust_radius: v.optimizer.final_trust_radius,
                seed: config.seed,
            };
            let readout = Readout::modulo(p, num_classes)?;
            Ok(TrainedModel::Vqc(vqc_train(feature_map, ansatz, readout, optimizer, xs, ys, config.seed)?))
        }
    }
}

/// Versioned on-disk form of a trained model and the scaler it expects.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub config_hash: String,
    pub feature_names: Vec<String>,
    pub class_names: Vec<String>,
    pub scaler: MinMaxScaler,
    pub model: TrainedModel,
}

impl ModelDocument {
    pub fn new(model: TrainedModel, scaler: MinMaxScaler, config: &ExperimentConfig, feature_names: Vec<String>, class_names: Vec<String>) -> Self {
        Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            seed: config.seed,
            config_hash: config.hash(),
            feature_names,
            class_names,
            scaler,
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let header: serde_json::Value = serde_json::from_str(text)?;
        if header.get("format").and_then(|v| v.as_str()) != Some(MODEL_FORMAT) {
            return Err(Error::Input("not a qexplain model document".into()));
        }
        match header.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(MODEL_VERSION) => Ok(serde_json::from_value(header)?),
            other => Err(Error::Input(format!("unsupported model document version {other:?}"))),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> (Vec<Vec<f64>>, Vec<usize>) {
        let xs: Vec<Vec<f64>> = (0..36)
            .map(|i| {
                let c = (i % 3) as f64;
                let j = (i as f64 * 0.618).fract() * 0.2;
                vec![0.1 + 0.35 * c + j, 0.8 - 0.3 * c + j * 0.5, 0.5 + j]
            })
            .collect();
        let ys = (0..36).map(|i| i % 3).collect();
        (xs, ys)
    }

    #[test]
    fn every_kind_round_trips_through_json() {
        let (xs, ys) = blobs();
        let mut config = ExperimentConfig::new();
        config.rf.trees = 5;
        config.vqc.reps = 1;
        config.vqc.optimizer.max_iters = 30;
        let scaler = MinMaxScaler::fit(&xs).unwrap();
        for kind in ModelKind::ALL {
            let model = train_model(kind, &config, &xs, &ys, 3).unwrap();
            assert_eq!(model.kind(), kind);
            let doc = ModelDocument::new(model, scaler.clone(), &config, vec!["a".into(), "b".into(), "c".into()], vec![]);
            let back = ModelDocument::from_json(&doc.to_json().unwrap()).unwrap();
            for x in &xs {
                assert_eq!(doc.model.predict_proba(x).unwrap(), back.model.predict_proba(x).unwrap());
            }
        }
    }

    #[test]
    fn rejects_foreign_documents() {
        assert!(ModelDocument::from_json(r#"{"format": "other", "version": 1}"#).is_err());
        assert!(ModelDocument::from_json(r#"{"format": "qexplain-model", "version": 99}"#).is_err());
    }
}
