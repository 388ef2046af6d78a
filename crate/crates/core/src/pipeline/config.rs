use std::path::Path;

use serde::{Deserialize, Serialize};

use super::data::sha256_hex;
use super::split::SplitMethod;
use crate::cml::ModelKind;
use crate::encode::Entanglement;
use crate::error::{Error, Result};
use crate::vqc::{AnsatzKind, OptimizerKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub method: SplitMethod,
    pub test_fraction: f64,
}

impl Default for SplitSection {
    fn default() -> Self {
        Self { method: SplitMethod::Stratified, test_fraction: 0.2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalerSection {
    /// Clamp transformed test rows into [0, 1].
    pub clamp: bool,
}

impl Default for ScalerSection {
    fn default() -> Self {
        Self { clamp: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvcSection {
    #[serde(rename = "C")]
    pub c: f64,
    /// RBF width; `None` means `1 / (p · Var(X))`.
    pub gamma: Option<f64>,
}

impl Default for SvcSection {
    fn default() -> Self {
        Self { c: 1.0, gamma: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureMapSection {
    pub reps: usize,
    pub entanglement: Entanglement,
}

impl Default for FeatureMapSection {
    fn default() -> Self {
        Self { reps: 2, entanglement: Entanglement::Linear }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QsvcSection {
    pub featuremap: FeatureMapSection,
    #[serde(rename = "C")]
    pub c: f64,
}

impl Default for QsvcSection {
    fn default() -> Self {
        Self { featuremap: FeatureMapSection::default(), c: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfSection {
    pub trees: usize,
    pub min_leaf: usize,
}

impl Default for RfSection {
    fn default() -> Self {
        Self { trees: 100, min_leaf: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub kind: OptimizerKind,
    pub max_iters: usize,
    pub initial_trust_radius: f64,
    pub final_trust_radius: f64,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        Self { kind: OptimizerKind::Cobyla, max_iters: 500, initial_trust_radius: 1.0, final_trust_radius: 1e-4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VqcSection {
    pub ansatz: AnsatzKind,
    pub reps: usize,
    pub entanglement: Entanglement,
    pub featuremap: FeatureMapSection,
    pub optimizer: OptimizerSection,
}

impl Default for VqcSection {
    fn default() -> Self {
        Self {
            ansatz: AnsatzKind::EfficientSU2,
            reps: 3,
            entanglement: Entanglement::Linear,
            featuremap: FeatureMapSection::default(),
            optimizer: OptimizerSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainSection {
    pub perm_repeats: usize,
    pub ale_intervals: usize,
    /// Maximum background rows for SHAP.
    pub shap_background: usize,
    pub bootstrap_resamples: usize,
}

impl Default for ExplainSection {
    fn default() -> Self {
        Self { perm_repeats: 30, ale_intervals: 10, shap_background: 100, bootstrap_resamples: 1000 }
    }
}

/// Complete experiment configuration; every field has a default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub models: Vec<ModelKind>,
    pub split: SplitSection,
    pub scaler: ScalerSection,
    pub svc: SvcSection,
    pub qsvc: QsvcSection,
    pub rf: RfSection,
    pub vqc: VqcSection,
    pub explain: ExplainSection,
}

impl ExperimentConfig {
    pub fn new() -> Self {
        Self { seed: 42, models: ModelKind::ALL.to_vec(), ..Self::default() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        // Missing `seed`/`models` keep the non-zero defaults of `new`.
        let mut merged = serde_json::to_value(Self::new())?;
        if let (Some(base), Some(over)) = (merged.as_object_mut(), value.as_object()) {
            for (k, v) in over {
                base.insert(k.clone(), v.clone());
            }
        } else {
            return Err(Error::Config("config must be a JSON object".into()));
        }
        let config: Self = serde_json::from_value(merged)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::Config("no models selected".into()));
        }
        if self.svc.c <= 0.0 || self.qsvc.c <= 0.0 {
            return Err(Error::Config("C must be positive".into()));
        }
        if self.svc.gamma.is_some_and(|g| g <= 0.0) {
            return Err(Error::Config("gamma must be positive".into()));
        }
        if self.rf.trees == 0 || self.rf.min_leaf == 0 {
            return Err(Error::Config("rf needs ≥1 tree and min_leaf ≥1".into()));
        }
        if self.vqc.reps == 0 || self.vqc.optimizer.max_iters == 0 {
            return Err(Error::Config("vqc needs ≥1 rep and ≥1 optimizer iteration".into()));
        }
        let e = &self.explain;
        if e.perm_repeats == 0 || e.ale_intervals < 2 || e.shap_background == 0 || e.bootstrap_resamples == 0 {
            return Err(Error::Config("explain settings must be positive (ale_intervals ≥ 2)".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_keeps_defaults() {
        let c = ExperimentConfig::from_json(r#"{"svc": {"C": 2.5}, "rf": {"trees": 7}}"#).unwrap();
        assert_eq!(c.svc.c, 2.5);
        assert_eq!(c.svc.gamma, None);
        assert_eq!(c.rf.trees, 7);
        assert_eq!(c.rf.min_leaf, 1);
        assert_eq!(c.seed, 42);
        assert_eq!(c.models.len(), 4);
        assert_eq!(c.vqc.optimizer.max_iters, 500);
    }

    #[test]
    fn round_trip_and_hash() {
        let c = ExperimentConfig::new();
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"C\""));
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        let other = ExperimentConfig { seed: 7, ..c.clone() };
        assert_ne!(other.hash(), c.hash());
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(ExperimentConfig::from_json(r#"{"svm": {}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"svc": {"C": -1}}"#).is_err());
        assert!(ExperimentConfig::from_json("[]").is_err());
    }
}
