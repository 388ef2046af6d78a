use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cml::{check_rows, Classifier};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeaturePermutation {
    pub feature: usize,
    /// Accuracy on each corrupted copy, one per repeat.
    pub scores: Vec<f64>,
    /// Reference score minus the mean corrupted score.
    pub importance: f64,
    /// Sample standard deviation of `scores` (0 for a single repeat).
    pub std: f64,
    #[serde(skip)]
    correct: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermutationReport {
    /// Accuracy of the model on the untouched data.
    pub baseline: f64,
    pub repeats: usize,
    pub seed: u64,
    pub samples: usize,
    pub features: Vec<FeaturePermutation>,
}

impl FeaturePermutation {
    /// `s − (1/K) Σ_k s_k` from stored scores.
    pub fn recompute_importance(&self, baseline: f64) -> f64 {
        baseline - self.scores.iter().sum::<f64>() / self.scores.len() as f64
    }
}

/// Seed for the shuffle of `feature` in `repeat`, mixed SplitMix64-style.
pub fn derive_seed(seed: u64, feature: usize, repeat: usize) -> u64 {
    let mut z = seed
        ^ (feature as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (repeat as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn count_correct<T: Real, M: Classifier<T> + ?Sized>(model: &M, xs: &[Vec<T>], ys: &[usize]) -> Result<usize> {
    let mut correct = 0;
    for (x, &y) in xs.iter().zip(ys) {
        if model.predict(x)? == y {
            correct += 1;
        }
    }
    Ok(correct)
}

/// Permutation importance with seeded shuffles (`K = repeats`).
pub fn permutation_importance<T: Real, M: Classifier<T> + ?Sized>(
    model: &M,
    xs: &[Vec<T>],
    ys: &[usize],
    repeats: usize,
    seed: u64,
) -> Result<PermutationReport> {
    permutation_importance_with(model, xs, ys, repeats, seed, |feature, repeat, n| {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, feature, repeat)));
        perm
    })
}

/// Permutation importance with caller-supplied row permutations.
///
/// `permutation(j, k, n)` gives the row order used for column `j` in repeat `k`;
/// the corrupted copy takes `x̃[i][j] = x[perm[i]][j]`.
pub fn permutation_importance_with<T, M, P>(
    model: &M,
    xs: &[Vec<T>],
    ys: &[usize],
    repeats: usize,
    seed: u64,
    permutation: P,
) -> Result<PermutationReport>
where
    T: Real,
    M: Classifier<T> + ?Sized,
    P: Fn(usize, usize, usize) -> Vec<usize> + Sync,
{
    let p = check_rows(xs, ys)?;
    if repeats == 0 {
        return Err(Error::Config("permutation importance needs at least one repeat".into()));
    }
    let n = xs.len();
    let baseline_correct = count_correct(model, xs, ys)?;
    let jobs: Vec<(usize, usize)> = (0..p).flat_map(|j| (0..repeats).map(move |k| (j, k))).collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(j, k)| {
            let perm = permutation(j, k, n);
            if perm.len() != n {
                return Err(Error::Dimension(format!(
                    "permutation of length {} for {n} rows",
                    perm.len()
                )));
            }
            let corrupted: Vec<Vec<T>> = (0..n)
                .map(|i| {
                    let mut row = xs[i].clone();
                    row[j] = xs[perm[i]][j];
                    row
                })
                .collect();
            count_correct(model, &corrupted, ys)
        })
        .collect::<Result<Vec<usize>>>()?;

    let nf = n as f64;
    let features = (0..p)
        .map(|j| {
            let correct = outcomes[j * repeats..(j + 1) * repeats].to_vec();
            let scores: Vec<f64> = correct.iter().map(|&c| c as f64 / nf).collect();
            // Exact rational means: all-equal scores give exactly zero importance.
            let total: usize = correct.iter().sum();
            let mean = total as f64 / (nf * repeats as f64);
            let std = if repeats > 1 {
                let m = scores.iter().sum::<f64>() / repeats as f64;
                (scores.iter().map(|s| (s - m).powi(2)).sum::<f64>() / (repeats - 1) as f64).sqrt()
            } else {
                0.0
            };
            FeaturePermutation {
                feature: j,
                importance: baseline_correct as f64 / nf - mean,
                scores,
                std,
                correct,
            }
        })
        .collect();
    Ok(PermutationReport {
        baseline: baseline_correct as f64 / nf,
        repeats,
        seed,
        samples: n,
        features,
    })
}
