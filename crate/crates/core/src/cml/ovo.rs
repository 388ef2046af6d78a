//! One-vs-one multiclass SVMs over an RBF or fidelity quantum kernel.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::kernel::rbf_kernel;
use super::svm::{svm_decision, svm_train_binary, SvmBinaryModel, SvmConfig};
use super::{check_labels, check_rows, softmax, Classifier, ModelKind};
use crate::encode::FeatureMapSpec;
use crate::error::{Error, Result};
use crate::qkernel::{gram_matrix, FeatureStates, KernelMatrix};
use crate::scalar::{argmax, Real};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairModel<T> {
    /// Class receiving the vote when the decision value is positive.
    pub positive: usize,
    pub negative: usize,
    /// Binary model whose support indices point into [`OvoSvm::support_union`].
    pub model: SvmBinaryModel<T>,
}

/// One binary SVM per unordered class pair, trained on a precomputed Gram matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OvoSvm<T> {
    pub num_classes: usize,
    pub pairs: Vec<PairModel<T>>,
    /// Sorted training indices that are support vectors of at least one pair.
    pub support_union: Vec<usize>,
}

/// Per-class votes and summed decision values for one sample.
#[derive(Clone, Debug, PartialEq)]
pub struct OvoScores<T> {
    pub votes: Vec<usize>,
    pub confidence: Vec<T>,
}

impl<T: Real> OvoScores<T> {
    /// Votes plus a squashed confidence in `(−1/3, 1/3)`: summed decision values only
    /// break ties between classes with equal vote counts.
    pub fn aggregated(&self) -> Vec<T> {
        let third = T::lit(3.0);
        self.votes
            .iter()
            .zip(&self.confidence)
            .map(|(&v, &c)| T::from_count(v) + c / (third * (c.abs() + T::one())))
            .collect()
    }

    pub fn label(&self) -> usize {
        argmax(&self.aggregated())
    }
}

/// Trains the one-vs-one ensemble on the Gram matrix of the training set.
pub fn ovo_train<T: Real>(
    gram: &KernelMatrix<T>,
    y: &[usize],
    num_classes: usize,
    config: &SvmConfig<T>,
) -> Result<OvoSvm<T>> {
    if num_classes < 2 {
        return Err(Error::Data("one-vs-one needs at least two classes".into()));
    }
    if gram.rows() != y.len() || gram.cols() != y.len() {
        return Err(Error::Dimension(format!(
            "{}×{} Gram matrix for {} labels",
            gram.rows(),
            gram.cols(),
            y.len()
        )));
    }
    check_labels(y, num_classes)?;
    for class in 0..num_classes {
        let count = y.iter().filter(|&&v| v == class).count();
        if count < 2 {
            return Err(Error::Data(format!("class {class} has {count} training sample(s)")));
        }
    }

    let mut raw = Vec::new();
    for a in 0..num_classes {
        for b in a + 1..num_classes {
            let idx: Vec<usize> = (0..y.len()).filter(|&t| y[t] == a || y[t] == b).collect();
            let labels: Vec<i8> = idx.iter().map(|&t| if y[t] == a { 1 } else { -1 }).collect();
            let mut model = svm_train_binary(&gram.submatrix(&idx), &labels, config)?;
            for s in &mut model.support_indices {
                *s = idx[*s];
            }
            raw.push((a, b, model));
        }
    }

    let mut support_union: Vec<usize> = raw
        .iter()
        .flat_map(|(_, _, m)| m.support_indices.iter().copied())
        .collect();
    support_union.sort_unstable();
    support_union.dedup();
    let pairs = raw
        .into_iter()
        .map(|(positive, negative, mut model)| {
            for s in &mut model.support_indices {
                *s = support_union.binary_search(s).expect("support index in union");
            }
            PairModel {
                positive,
                negative,
                model,
            }
        })
        .collect();
    Ok(OvoSvm {
        num_classes,
        pairs,
        support_union,
    })
}

impl<T: Real> OvoSvm<T> {
    /// Scores from kernel values against `support_union`.
    pub fn scores(&self, k_union: &[T]) -> Result<OvoScores<T>> {
        if k_union.len() != self.support_union.len() {
            return Err(Error::Dimension(format!(
                "kernel row of length {} for {} support vectors",
                k_union.len(),
                self.support_union.len()
            )));
        }
        let mut votes = vec![0usize; self.num_classes];
        let mut confidence = vec![T::zero(); self.num_classes];
        let mut row = Vec::new();
        for pair in &self.pairs {
            row.clear();
            row.extend(pair.model.support_indices.iter().map(|&s| k_union[s]));
            let f = svm_decision(&pair.model, &row)?;
            if f > T::zero() {
                votes[pair.positive] += 1;
            } else {
                votes[pair.negative] += 1;
            }
            confidence[pair.positive] += f;
            confidence[pair.negative] -= f;
        }
        Ok(OvoScores { votes, confidence })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SvmKernel<T> {
    Rbf { gamma: T },
    Quantum { feature_map: FeatureMapSpec },
}

/// Kernel SVM classifier (SVC with RBF, QSVC with the fidelity kernel).
///
/// Probabilities are a temperature-1 softmax over the aggregated one-vs-one scores,
/// so their argmax always equals the voted label.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SvmClassifier<T> {
    pub kernel: SvmKernel<T>,
    pub config: SvmConfig<T>,
    pub ovo: OvoSvm<T>,
    /// Feature rows of `ovo.support_union`.
    pub support_vectors: Vec<Vec<T>>,
    pub num_features: usize,
    #[serde(skip)]
    states: OnceLock<FeatureStates<T>>,
}

impl<T: Real> SvmClassifier<T> {
    /// Fits on raw feature rows; the Gram matrix is built with the chosen kernel.
    pub fn fit(
        kernel: SvmKernel<T>,
        xs: &[Vec<T>],
        ys: &[usize],
        num_classes: usize,
        config: SvmConfig<T>,
    ) -> Result<Self> {
        let gram = Self::training_gram(&kernel, xs, ys)?;
        Self::fit_with_gram(kernel, &gram, xs, ys, num_classes, config)
    }

    pub fn training_gram(kernel: &SvmKernel<T>, xs: &[Vec<T>], ys: &[usize]) -> Result<KernelMatrix<T>> {
        check_rows(xs, ys)?;
        match kernel {
            SvmKernel::Rbf { gamma } => Ok(KernelMatrix::symmetric_from_fn(xs.len(), |i, j| {
                rbf_kernel(&xs[i], &xs[j], *gamma)
            })),
            SvmKernel::Quantum { feature_map } => gram_matrix(feature_map, xs),
        }
    }

    /// Fits on a precomputed training Gram matrix.
    pub fn fit_with_gram(
        kernel: SvmKernel<T>,
        gram: &KernelMatrix<T>,
        xs: &[Vec<T>],
        ys: &[usize],
        num_classes: usize,
        config: SvmConfig<T>,
    ) -> Result<Self> {
        let num_features = check_rows(xs, ys)?;
        if let SvmKernel::Quantum { feature_map } = &kernel {
            if feature_map.num_features != num_features {
                return Err(Error::Arity {
                    expected: feature_map.num_features,
                    got: num_features,
                });
            }
        }
        let ovo = ovo_train(gram, ys, num_classes, &config)?;
        let support_vectors = ovo.support_union.iter().map(|&i| xs[i].clone()).collect();
        Ok(Self {
            kernel,
            config,
            ovo,
            support_vectors,
            num_features,
            states: OnceLock::new(),
        })
    }

    pub fn kernel_row(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.num_features {
            return Err(Error::Arity {
                expected: self.num_features,
                got: x.len(),
            });
        }
        match &self.kernel {
            SvmKernel::Rbf { gamma } => Ok(self
                .support_vectors
                .iter()
                .map(|sv| rbf_kernel(sv, x, *gamma))
                .collect()),
            SvmKernel::Quantum { feature_map } => {
                if self.states.get().is_none() {
                    let prepared = FeatureStates::prepare(*feature_map, &self.support_vectors)?;
                    let _ = self.states.set(prepared);
                }
                self.states.get().expect("prepared states").kernel_row(x)
            }
        }
    }

    pub fn scores(&self, x: &[T]) -> Result<OvoScores<T>> {
        self.ovo.scores(&self.kernel_row(x)?)
    }
}

impl<T: Real> Classifier<T> for SvmClassifier<T> {
    fn kind(&self) -> ModelKind {
        match self.kernel {
            SvmKernel::Rbf { .. } => ModelKind::Svc,
            SvmKernel::Quantum { .. } => ModelKind::Qsvc,
        }
    }

    fn num_classes(&self) -> usize {
        self.ovo.num_classes
    }

    fn num_features(&self) -> usize {
        self.num_features
    }

    fn predict_proba(&self, x: &[T]) -> Result<Vec<T>> {
        Ok(softmax(&self.scores(x)?.aggregated()))
    }

    fn predict(&self, x: &[T]) -> Result<usize> {
        Ok(self.scores(x)?.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cml::accuracy;

    fn blobs() -> (Vec<Vec<f64>>, Vec<usize>) {
        let centers = [[0.1, 0.1], [0.9, 0.1], [0.5, 0.9]];
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (c, center) in centers.iter().enumerate() {
            for k in 0..6 {
                let dx = 0.03 * (k as f64 - 2.5);
                let dy = 0.02 * ((k * 7 % 5) as f64 - 2.0);
                xs.push(vec![center[0] + dx, center[1] + dy]);
                ys.push(c);
            }
        }
        (xs, ys)
    }

    #[test]
    fn three_classes_give_three_pair_models() {
        let (xs, ys) = blobs();
        let model = SvmClassifier::fit(SvmKernel::Rbf { gamma: 2.0 }, &xs, &ys, 3, SvmConfig::default())
            .unwrap();
        assert_eq!(model.ovo.pairs.len(), 3);
        assert_eq!(accuracy(&model, &xs, &ys).unwrap(), 1.0);
        for x in &xs {
            let scores = model.scores(x).unwrap();
            assert_eq!(scores.votes.iter().sum::<usize>(), 3);
            let p = model.predict_proba(x).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert_eq!(argmax(&p), model.predict(x).unwrap());
        }
    }

    #[test]
    fn two_classes_follow_the_binary_sign() {
        let (xs, ys) = blobs();
        let (xs, ys): (Vec<_>, Vec<_>) = xs.into_iter().zip(ys).filter(|(_, y)| *y < 2).unzip();
        let kernel = SvmKernel::Rbf { gamma: 1.5 };
        let model = SvmClassifier::fit(kernel, &xs, &ys, 2, SvmConfig::default()).unwrap();
        let gram = SvmClassifier::training_gram(&kernel, &xs, &ys).unwrap();
        let labels: Vec<i8> = ys.iter().map(|&y| if y == 0 { 1 } else { -1 }).collect();
        let binary = svm_train_binary(&gram, &labels, &SvmConfig::default()).unwrap();
        for probe in [[0.2, 0.3], [0.6, 0.0], [0.5, 0.5], [0.95, 0.2]] {
            let row: Vec<f64> = binary
                .support_indices
                .iter()
                .map(|&i| rbf_kernel(&xs[i], &probe, 1.5))
                .collect();
            let f = svm_decision(&binary, &row).unwrap();
            let expected = if f > 0.0 { 0 } else { 1 };
            assert_eq!(model.predict(&probe).unwrap(), expected);
        }
    }

    #[test]
    fn class_with_one_sample_is_rejected() {
        let xs = vec![vec![0.0], vec![0.1], vec![1.0]];
        let ys = vec![0, 0, 1];
        assert!(matches!(
            SvmClassifier::fit(SvmKernel::Rbf { gamma: 1.0 }, &xs, &ys, 2, SvmConfig::default()),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn serde_round_trip_keeps_predictions() {
        let (xs, ys) = blobs();
        let fm = FeatureMapSpec::new(2, 2, crate::encode::Entanglement::Linear).unwrap();
        let model = SvmClassifier::fit(
            SvmKernel::Quantum { feature_map: fm },
            &xs,
            &ys,
            3,
            SvmConfig::default(),
        )
        .unwrap();
        let json = serde_json::to_string(&model).unwrap();
        let back: SvmClassifier<f64> = serde_json::from_str(&json).unwrap();
        for x in &xs {
            assert_eq!(model.predict_proba(x).unwrap(), back.predict_proba(x).unwrap());
        }
    }
}
