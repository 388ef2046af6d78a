use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMethod {
    /// Per-class holdout of `round(n_c · fraction)` rows.
    #[default]
    Stratified,
    /// Plain shuffle of all rows.
    Shuffle,
}

impl FromStr for SplitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "stratified" => Ok(Self::Stratified),
            "shuffle" => Ok(Self::Shuffle),
            other => Err(Error::Config(format!("unknown split method {other:?}"))),
        }
    }
}

/// Sorted, disjoint row indices covering the dataset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn split_indices(labels: &[usize], num_classes: usize, method: SplitMethod, test_fraction: f64, seed: u64) -> Result<Split> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!("test fraction {test_fraction} outside (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    match method {
        SplitMethod::Stratified => {
            for c in 0..num_classes {
                let mut rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
                if rows.is_empty() {
                    continue;
                }
                if rows.len() < 2 {
                    return Err(Error::Size(format!("class {c} has fewer than two samples")));
                }
                rows.shuffle(&mut rng);
                let k = ((rows.len() as f64 * test_fraction).round() as usize).clamp(1, rows.len() - 1);
                test.extend_from_slice(&rows[..k]);
                train.extend_from_slice(&rows[k..]);
            }
        }
        SplitMethod::Shuffle => {
            if labels.len() < 2 {
                return Err(Error::Size("need at least two samples to split".into()));
            }
            let mut rows: Vec<usize> = (0..labels.len()).collect();
            rows.shuffle(&mut rng);
            let k = ((rows.len() as f64 * test_fraction).round() as usize).clamp(1, rows.len() - 1);
            test.extend_from_slice(&rows[..k]);
            train.extend_from_slice(&rows[k..]);
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}
