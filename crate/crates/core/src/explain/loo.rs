use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cml::{accuracy, check_rows, Classifier};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LooEntry {
    pub feature: usize,
    pub score_without: Option<f64>,
    /// Full score minus the score without this feature.
    pub delta: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LooReport {
    pub full_score: f64,
    pub entries: Vec<LooEntry>,
}

/// Copy of `xs` without column `j`.
pub fn drop_column<T: Clone>(xs: &[Vec<T>], j: usize) -> Vec<Vec<T>> {
    xs.iter()
        .map(|x| x.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, v)| v.clone()).collect())
        .collect()
}

/// Leave-one-feature-out importance: retrain without each column and score
/// test accuracy. A failed retraining is recorded and the others continue.
pub fn loo_importance<T, F>(
    trainer: F,
    train: (&[Vec<T>], &[usize]),
    test: (&[Vec<T>], &[usize]),
) -> Result<LooReport>
where
    T: Real,
    F: Fn(&[Vec<T>], &[usize]) -> Result<Box<dyn Classifier<T>>> + Sync,
{
    let p = check_rows(train.0, train.1)?;
    if p < 2 {
        return Err(Error::Size("leave-one-out needs at least two features".into()));
    }
    if check_rows(test.0, test.1)? != p {
        return Err(Error::Dimension("train and test feature counts differ".into()));
    }
    let full = trainer(train.0, train.1)?;
    let full_score = accuracy(&full, test.0, test.1)?;
    let entries = (0..p)
        .into_par_iter()
        .map(|j| {
            let outcome = trainer(&drop_column(train.0, j), train.1)
                .and_then(|m| accuracy(&m, &drop_column(test.0, j), test.1));
            match outcome {
                Ok(score) => LooEntry {
                    feature: j,
                    score_without: Some(score),
                    delta: Some(full_score - score),
                    error: None,
                },
                Err(e) => LooEntry { feature: j, score_without: None, delta: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    Ok(LooReport { full_score, entries })
}
