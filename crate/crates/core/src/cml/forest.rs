//! Bootstrap-aggregated random forests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{tree_fit_indices, DecisionTree, TreeConfig};
use super::{check_labels, check_rows, Classifier, ModelKind};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    Sqrt,
    All,
    Fixed(usize),
}

impl MaxFeatures {
    pub fn resolve(self, p: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => ((p as f64).sqrt().floor() as usize).max(1),
            MaxFeatures::All => p,
            MaxFeatures::Fixed(m) => m.clamp(1, p),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub trees: usize,
    pub bootstrap: bool,
    pub max_features: MaxFeatures,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            trees: 100,
            bootstrap: true,
            max_features: MaxFeatures::Sqrt,
            max_depth: None,
            min_leaf: 1,
            seed: 42,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest<T> {
    pub trees: Vec<DecisionTree<T>>,
    /// Seed of each tree's generator (`seed + tree index`).
    pub tree_seeds: Vec<u64>,
    pub num_classes: usize,
    pub num_features: usize,
    pub config: ForestConfig,
}

/// Trains `config.trees` trees, each on its own bootstrap resample of size `n`.
pub fn forest_fit<T: Real>(
    xs: &[Vec<T>],
    ys: &[usize],
    num_classes: usize,
    config: ForestConfig,
) -> Result<RandomForest<T>> {
    let p = check_rows(xs, ys)?;
    check_labels(ys, num_classes)?;
    if config.trees == 0 {
        return Err(Error::Config("forest needs at least one tree".into()));
    }
    let tree_config = TreeConfig {
        max_depth: config.max_depth,
        min_leaf: config.min_leaf,
        max_features: Some(config.max_features.resolve(p)),
    };
    let n = xs.len();
    let tree_seeds: Vec<u64> = (0..config.trees as u64)
        .map(|b| config.seed.wrapping_add(b))
        .collect();
    let trees = tree_seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows = if config.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            tree_fit_indices(xs, ys, rows, num_classes, tree_config, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RandomForest {
        trees,
        tree_seeds,
        num_classes,
        num_features: p,
        config,
    })
}

impl<T: Real> RandomForest<T> {
    /// Mean of the trees' leaf probabilities.
    pub fn forest_predict_proba(&self, x: &[T]) -> Vec<T> {
        let mut acc = vec![T::zero(); self.num_classes];
        for tree in &self.trees {
            for (a, p) in acc.iter_mut().zip(tree.tree_predict_proba(x)) {
                *a += p;
            }
        }
        let b = T::from_count(self.trees.len());
        acc.into_iter().map(|a| a / b).collect()
    }
}

impl<T: Real> Classifier<T> for RandomForest<T> {
    fn kind(&self) -> ModelKind {
        ModelKind::Rf
    }

    fn num_classes(&self) -> usize {
        self.num_classes
    }

    fn num_features(&self) -> usize {
        self.num_features
    }

    fn predict_proba(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.num_features {
            return Err(Error::Arity {
                expected: self.num_features,
                got: x.len(),
            });
        }
        Ok(self.forest_predict_proba(x))
    }
}
