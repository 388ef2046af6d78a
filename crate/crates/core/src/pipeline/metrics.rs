use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cml::Classifier;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Misclassification {
    /// Position within the test split.
    pub position: usize,
    /// Row index in the full dataset.
    pub row: usize,
    pub actual: usize,
    pub predicted: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub resamples: usize,
    pub seed: u64,
    pub mean: f64,
    pub p25: f64,
    pub p75: f64,
    pub scores: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    /// `confusion[actual][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub predictions: Vec<usize>,
    pub misclassified: Vec<Misclassification>,
    pub bootstrap: Option<BootstrapSummary>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Classification report from labels; `rows` maps test positions to dataset rows.
pub fn evaluate_predictions(actual: &[usize], predicted: &[usize], num_classes: usize, rows: &[usize]) -> Result<EvaluationReport> {
    if actual.len() != predicted.len() || actual.len() != rows.len() {
        return Err(Error::Dimension("labels, predictions and rows differ in length".into()));
    }
    if actual.iter().chain(predicted).any(|&c| c >= num_classes) {
        return Err(Error::Label(format!("label outside 0..{num_classes}")));
    }
    let mut confusion = vec![vec![0usize; num_classes]; num_classes];
    for (&a, &p) in actual.iter().zip(predicted) {
        confusion[a][p] += 1;
    }
    let per_class = (0..num_classes)
        .map(|c| {
            let tp = confusion[c][c];
            let support: usize = confusion[c].iter().sum();
            let predicted_c: usize = confusion.iter().map(|row| row[c]).sum();
            let precision = ratio(tp, predicted_c);
            let recall = ratio(tp, support);
            let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
            ClassMetrics { precision, recall, f1, support }
        })
        .collect();
    let correct = (0..num_classes).map(|c| confusion[c][c]).sum();
    let misclassified = (0..actual.len())
        .filter(|&i| actual[i] != predicted[i])
        .map(|i| Misclassification { position: i, row: rows[i], actual: actual[i], predicted: predicted[i] })
        .collect();
    Ok(EvaluationReport {
        accuracy: ratio(correct, actual.len()),
        per_class,
        confusion,
        predictions: predicted.to_vec(),
        misclassified,
        bootstrap: None,
    })
}

pub fn evaluate<M: Classifier<f64> + ?Sized>(model: &M, xs: &[Vec<f64>], ys: &[usize], rows: &[usize]) -> Result<EvaluationReport> {
    let predicted = model.predict_batch(xs)?;
    evaluate_predictions(ys, &predicted, model.num_classes(), rows)
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_type7(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Bootstrap accuracy from cached predictions: `resamples` draws of size n
/// with replacement.
pub fn bootstrap_accuracy(actual: &[usize], predicted: &[usize], resamples: usize, seed: u64) -> Result<BootstrapSummary> {
    let n = actual.len();
    if n == 0 || predicted.len() != n {
        return Err(Error::Size("bootstrap needs matching, nonempty labels and predictions".into()));
    }
    if resamples == 0 {
        return Err(Error::Config("bootstrap needs at least one resample".into()));
    }
    let hits: Vec<bool> = actual.iter().zip(predicted).map(|(a, p)| a == p).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scores: Vec<f64> = (0..resamples)
        .map(|_| (0..n).filter(|_| hits[rng.gen_range(0..n)]).count() as f64 / n as f64)
        .collect();
    let mut sorted = scores.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(BootstrapSummary {
        resamples,
        seed,
        mean: scores.iter().sum::<f64>() / resamples as f64,
        p25: quantile_type7(&sorted, 0.25),
        p75: quantile_type7(&sorted, 0.75),
        scores,
    })
}
