use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cml::Classifier;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Coalitions are enumerated exhaustively, so the feature count is capped.
pub const MAX_SHAP_FEATURES: usize = 12;

/// Exact interventional Shapley values of one sample, for every class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapExplanation<T> {
    pub x: Vec<T>,
    /// `v(∅)` per class: the mean prediction over the background.
    pub base_values: Vec<T>,
    /// Model output at `x` per class.
    pub predictions: Vec<T>,
    /// `values[c][i]` is the attribution of feature `i` for class `c`.
    pub values: Vec<Vec<T>>,
    pub background_id: String,
}

impl<T: Real> ShapExplanation<T> {
    /// `Σ φ − (f(x) − base)` for class `c`.
    pub fn efficiency_gap(&self, c: usize) -> T {
        let total: T = self.values[c].iter().copied().sum();
        total - (self.predictions[c] - self.base_values[c])
    }
}

/// Mean absolute attribution over a sample set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapGlobal<T> {
    /// `per_class[c][i]`.
    pub per_class: Vec<Vec<T>>,
    /// Mean over samples and classes.
    pub pooled: Vec<T>,
    pub explanations: Vec<ShapExplanation<T>>,
}

/// Up to `max_rows` rows of `train`, drawn without replacement with `seed`.
/// Returns the rows and an identifier describing the draw.
pub fn select_background<T: Real>(train: &[Vec<T>], max_rows: usize, seed: u64) -> (Vec<Vec<T>>, String) {
    if train.len() <= max_rows {
        return (train.to_vec(), format!("train[{}]", train.len()));
    }
    let mut idx = sample(&mut ChaCha8Rng::seed_from_u64(seed), train.len(), max_rows).into_vec();
    idx.sort_unstable();
    (
        idx.iter().map(|&i| train[i].clone()).collect(),
        format!("train[{}]:subsample({max_rows},seed={seed})", train.len()),
    )
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Shapley weights `|S|!(p−|S|−1)!/p!` indexed by `|S|`.
fn weights<T: Real>(p: usize) -> Vec<T> {
    (0..p)
        .map(|s| T::lit(factorial(s) * factorial(p - s - 1) / factorial(p)))
        .collect()
}

/// Exact Shapley values of `x` against `background` for all classes.
pub fn shap_exact<T: Real, M: Classifier<T> + ?Sized>(
    model: &M,
    x: &[T],
    background: &[Vec<T>],
    background_id: &str,
) -> Result<ShapExplanation<T>> {
    let p = model.num_features();
    if p > MAX_SHAP_FEATURES {
        return Err(Error::Combinatorial { features: p, max: MAX_SHAP_FEATURES });
    }
    if background.is_empty() {
        return Err(Error::Size("SHAP background is empty".into()));
    }
    if x.len() != p || background.iter().any(|b| b.len() != p) {
        return Err(Error::Dimension(format!("SHAP inputs must have {p} features")));
    }
    let classes = model.num_classes();
    let full = (1usize << p) - 1;
    let predictions = model.predict_proba(x)?;

    // The full coalition is averaged like the others so that a feature the
    // model ignores gets exactly zero attribution.
    let values: Vec<Vec<T>> = (0..=full)
        .into_par_iter()
        .map(|mask| {
            let mut sum = vec![T::zero(); classes];
            let mut row = vec![T::zero(); p];
            for b in background {
                for i in 0..p {
                    row[i] = if mask >> i & 1 == 1 { x[i] } else { b[i] };
                }
                for (s, v) in sum.iter_mut().zip(model.predict_proba(&row)?) {
                    *s += v;
                }
            }
            let n = T::from_count(background.len());
            Ok(sum.into_iter().map(|s| s / n).collect())
        })
        .collect::<Result<_>>()?;

    let w = weights::<T>(p);
    let phi = (0..classes)
        .map(|c| {
            (0..p)
                .map(|i| {
                    let bit = 1usize << i;
                    (0..=full)
                        .filter(|mask| mask & bit == 0)
                        .fold(T::zero(), |acc, mask| {
                            let size = mask.count_ones() as usize;
                            acc + w[size] * (values[mask | bit][c] - values[mask][c])
                        })
                })
                .collect()
        })
        .collect();
    Ok(ShapExplanation {
        x: x.to_vec(),
        base_values: values[0].clone(),
        predictions,
        values: phi,
        background_id: background_id.to_string(),
    })
}

/// Mean `|φ_i|` over `xs`, per class and pooled over classes.
pub fn shap_global<T: Real, M: Classifier<T> + ?Sized>(
    model: &M,
    xs: &[Vec<T>],
    background: &[Vec<T>],
    background_id: &str,
) -> Result<ShapGlobal<T>> {
    if xs.is_empty() {
        return Err(Error::Size("no samples to explain".into()));
    }
    let explanations = xs
        .iter()
        .map(|x| shap_exact(model, x, background, background_id))
        .collect::<Result<Vec<_>>>()?;
    let p = model.num_features();
    let classes = model.num_classes();
    let n = T::from_count(xs.len());
    let per_class: Vec<Vec<T>> = (0..classes)
        .map(|c| {
            (0..p)
                .map(|i| explanations.iter().map(|e| e.values[c][i].abs()).sum::<T>() / n)
                .collect()
        })
        .collect();
    let pooled = (0..p)
        .map(|i| per_class.iter().map(|row| row[i]).sum::<T>() / T::from_count(classes))
        .collect();
    Ok(ShapGlobal { per_class, pooled, explanations })
}
