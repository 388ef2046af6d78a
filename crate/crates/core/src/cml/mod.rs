//! Classical learners behind a uniform classifier contract.

pub mod forest;
pub mod kernel;
pub mod ovo;
pub mod svm;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::{argmax, Real};

pub use forest::{forest_fit, ForestConfig, MaxFeatures, RandomForest};
pub use kernel::{gamma_scale, rbf_kernel};
pub use ovo::{ovo_train, OvoSvm, SvmClassifier, SvmKernel};
pub use svm::{svm_decision, svm_train_binary, SvmBinaryModel, SvmConfig};
pub use tree::{tree_fit, DecisionTree, TreeConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Svc,
    Qsvc,
    Rf,
    Vqc,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Svc, ModelKind::Qsvc, ModelKind::Rf, ModelKind::Vqc];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Svc => "svc",
            ModelKind::Qsvc => "qsvc",
            ModelKind::Rf => "rf",
            ModelKind::Vqc => "vqc",
        }
    }

    pub fn is_quantum(self) -> bool {
        matches!(self, ModelKind::Qsvc | ModelKind::Vqc)
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "svc" => Ok(ModelKind::Svc),
            "qsvc" => Ok(ModelKind::Qsvc),
            "rf" => Ok(ModelKind::Rf),
            "vqc" => Ok(ModelKind::Vqc),
            other => Err(crate::Error::Config(format!("unknown model {other:?}"))),
        }
    }
}

/// Trained classifier as seen by evaluation and the explainers.
///
/// `predict` must agree with the argmax of `predict_proba` (lowest index on ties).
pub trait Classifier<T: Real>: Send + Sync {
    fn kind(&self) -> ModelKind;

    fn num_classes(&self) -> usize;

    fn num_features(&self) -> usize;

    /// Class probability vector: nonnegative, sums to one.
    fn predict_proba(&self, x: &[T]) -> Result<Vec<T>>;

    fn predict(&self, x: &[T]) -> Result<usize> {
        Ok(argmax(&self.predict_proba(x)?))
    }

    fn predict_batch(&self, xs: &[Vec<T>]) -> Result<Vec<usize>> {
        xs.iter().map(|x| self.predict(x)).collect()
    }

    fn predict_proba_batch(&self, xs: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
        xs.iter().map(|x| self.predict_proba(x)).collect()
    }
}

impl<T: Real, C: Classifier<T> + ?Sized> Classifier<T> for Box<C> {
    fn kind(&self) -> ModelKind {
        (**self).kind()
    }
    fn num_classes(&self) -> usize {
        (**self).num_classes()
    }
    fn num_features(&self) -> usize {
        (**self).num_features()
    }
    fn predict_proba(&self, x: &[T]) -> Result<Vec<T>> {
        (**self).predict_proba(x)
    }
    fn predict(&self, x: &[T]) -> Result<usize> {
        (**self).predict(x)
    }
}

/// Fraction of `xs` whose predicted label equals `ys`.
pub fn accuracy<T: Real, M: Classifier<T> + ?Sized>(model: &M, xs: &[Vec<T>], ys: &[usize]) -> Result<f64> {
    if xs.is_empty() {
        return Ok(0.0);
    }
    let mut correct = 0usize;
    for (x, &y) in xs.iter().zip(ys) {
        if model.predict(x)? == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / xs.len() as f64)
}

pub(crate) fn softmax<T: Real>(scores: &[T]) -> Vec<T> {
    let max = scores.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = scores.iter().map(|s| (*s - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub fn check_labels(ys: &[usize], num_classes: usize) -> Result<()> {
    if let Some(bad) = ys.iter().find(|&&y| y >= num_classes) {
        return Err(crate::Error::Data(format!(
            "label {bad} outside 0..{num_classes}"
        )));
    }
    Ok(())
}

pub fn check_rows<T>(xs: &[Vec<T>], ys: &[usize]) -> Result<usize> {
    if xs.is_empty() {
        return Err(crate::Error::Size("no training samples".into()));
    }
    if xs.len() != ys.len() {
        return Err(crate::Error::Dimension(format!(
            "{} samples but {} labels",
            xs.len(),
            ys.len()
        )));
    }
    let p = xs[0].len();
    if p == 0 || xs.iter().any(|x| x.len() != p) {
        return Err(crate::Error::Dimension("ragged or empty feature rows".into()));
    }
    Ok(p)
}
