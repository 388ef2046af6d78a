//! Greedy CART classification trees with Gini impurity.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_labels, check_rows, Classifier, ModelKind};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// `None` grows until leaves are pure or cannot be split.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features considered per split; `None` considers all of them.
    pub max_features: Option<usize>,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_leaf: 1,
            max_features: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum Node<T> {
    Leaf {
        /// Training samples per class that reached this leaf.
        counts: Vec<usize>,
    },
    Split {
        feature: usize,
        /// Samples with `x[feature] <= threshold` go left.
        threshold: T,
        left: Box<Node<T>>,
        right: Box<Node<T>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree<T> {
    pub root: Node<T>,
    pub num_classes: usize,
    pub num_features: usize,
}

fn gini_sum(counts: &[usize], total: usize) -> f64 {
    // n·Gini = n − Σc²/n; summing this over children gives n_parent × weighted impurity.
    if total == 0 {
        return 0.0;
    }
    let sq: usize = counts.iter().map(|c| c * c).sum();
    total as f64 - sq as f64 / total as f64
}

struct Builder<'a, T, R> {
    xs: &'a [Vec<T>],
    ys: &'a [usize],
    num_classes: usize,
    num_features: usize,
    config: TreeConfig,
    rng: &'a mut R,
}

impl<T: Real, R: Rng> Builder<'_, T, R> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &i in idx {
            counts[self.ys[i]] += 1;
        }
        counts
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        match self.config.max_features {
            Some(m) if m < self.num_features => {
                let mut f = sample(self.rng, self.num_features, m.max(1)).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..self.num_features).collect(),
        }
    }

    /// Lowest-impurity split; ties keep the earlier feature and lower threshold.
    fn best_split(&mut self, idx: &[usize], parent: f64) -> Option<(usize, T, f64)> {
        let min_leaf = self.config.min_leaf.max(1);
        let n = idx.len();
        let mut best: Option<(usize, T, f64)> = None;
        let mut order = idx.to_vec();
        for feature in self.candidate_features() {
            order.sort_by(|&a, &b| {
                self.xs[a][feature]
                    .partial_cmp(&self.xs[b][feature])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            let mut left = vec![0usize; self.num_classes];
            let mut right = self.counts(idx);
            for pos in 0..n - 1 {
                let label = self.ys[order[pos]];
                left[label] += 1;
                right[label] -= 1;
                let (lo, hi) = (self.xs[order[pos]][feature], self.xs[order[pos + 1]][feature]);
                let n_left = pos + 1;
                if lo == hi || n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let impurity = gini_sum(&left, n_left) + gini_sum(&right, n - n_left);
                if impurity < parent && best.as_ref().is_none_or(|b| impurity < b.2) {
                    let mut threshold = (lo + hi) * T::lit(0.5);
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some((feature, threshold, impurity));
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> Node<T> {
        let counts = self.counts(&idx);
        let parent = gini_sum(&counts, idx.len());
        let depth_ok = self.config.max_depth.is_none_or(|d| depth < d);
        if parent <= 0.0 || !depth_ok || idx.len() < 2 * self.config.min_leaf.max(1) {
            return Node::Leaf { counts };
        }
        match self.best_split(&idx, parent) {
            None => Node::Leaf { counts },
            Some((feature, threshold, _)) => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    idx.into_iter().partition(|&i| self.xs[i][feature] <= threshold);
                Node::Split {
                    feature,
                    threshold,
                    left: Box::new(self.grow(l, depth + 1)),
                    right: Box::new(self.grow(r, depth + 1)),
                }
            }
        }
    }
}

/// Fits a tree on the rows listed in `sample_indices` (repeats allowed).
pub fn tree_fit_indices<T: Real, R: Rng>(
    xs: &[Vec<T>],
    ys: &[usize],
    sample_indices: Vec<usize>,
    num_classes: usize,
    config: TreeConfig,
    rng: &mut R,
) -> Result<DecisionTree<T>> {
    let num_features = check_rows(xs, ys)?;
    check_labels(ys, num_classes)?;
    if sample_indices.is_empty() {
        return Err(Error::Size("tree fit on zero samples".into()));
    }
    let mut builder = Builder {
        xs,
        ys,
        num_classes,
        num_features,
        config,
        rng,
    };
    let root = builder.grow(sample_indices, 0);
    Ok(DecisionTree {
        root,
        num_classes,
        num_features,
    })
}

pub fn tree_fit<T: Real, R: Rng>(
    xs: &[Vec<T>],
    ys: &[usize],
    num_classes: usize,
    config: TreeConfig,
    rng: &mut R,
) -> Result<DecisionTree<T>> {
    tree_fit_indices(xs, ys, (0..xs.len()).collect(), num_classes, config, rng)
}

impl<T: Real> DecisionTree<T> {
    pub fn leaf_counts(&self, x: &[T]) -> &[usize] {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { counts } => return counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x[*feature] <= *threshold { left } else { right },
            }
        }
    }

    /// Leaf class frequencies normalised to probabilities.
    pub fn tree_predict_proba(&self, x: &[T]) -> Vec<T> {
        let counts = self.leaf_counts(x);
        let total = T::from_count(counts.iter().sum());
        counts.iter().map(|&c| T::from_count(c) / total).collect()
    }

    pub fn depth(&self) -> usize {
        fn walk<T>(n: &Node<T>) -> usize {
            match n {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(left).max(walk(right)),
            }
        }
        walk(&self.root)
    }

    /// Features used by at least one split.
    pub fn split_features(&self) -> Vec<usize> {
        fn walk<T>(n: &Node<T>, out: &mut Vec<usize>) {
            if let Node::Split {
                feature, left, right, ..
            } = n
            {
                out.push(*feature);
                walk(left, out);
                walk(right, out);
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn leaves(&self) -> Vec<&[usize]> {
        fn walk<'a, T>(n: &'a Node<T>, out: &mut Vec<&'a [usize]>) {
            match n {
                Node::Leaf { counts } => out.push(counts),
                Node::Split { left, right, .. } => {
                    walk(left, out);
                    walk(right, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }
}

impl<T: Real> Classifier<T> for DecisionTree<T> {
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
        Ok(self.tree_predict_proba(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn pure_data_is_a_single_leaf() {
        let xs = vec![vec![0.1], vec![0.5], vec![0.9]];
        let tree = tree_fit(&xs, &[1, 1, 1], 2, TreeConfig::default(), &mut rng()).unwrap();
        assert_eq!(tree.root, Node::Leaf { counts: vec![0, 3] });
        assert_eq!(tree.tree_predict_proba(&[0.3]), vec![0.0, 1.0]);
    }

    /// Brute force: every threshold between sorted neighbours, scored by misclassification.
    fn brute_force_stump(xs: &[f64], ys: &[usize]) -> f64 {
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut best = (usize::MAX, 0.0);
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                continue;
            }
            let t = 0.5 * (w[0] + w[1]);
            let errors = xs
                .iter()
                .zip(ys)
                .filter(|(x, y)| (**x > t) != (**y == 1))
                .count();
            if errors < best.0 {
                best = (errors, t);
            }
        }
        best.1
    }

    #[test]
    fn threshold_data_yields_exact_stump() {
        let xs1 = [0.05, 0.9, 0.32, 0.41, 0.77, 0.12, 0.58, 0.66, 0.2, 0.48];
        let ys: Vec<usize> = xs1.iter().map(|&x| usize::from(x > 0.45)).collect();
        let xs: Vec<Vec<f64>> = xs1.iter().map(|&x| vec![x]).collect();
        let tree = tree_fit(&xs, &ys, 2, TreeConfig::default(), &mut rng()).unwrap();
        assert_eq!(tree.depth(), 1);
        match tree.root {
            Node::Split { threshold, .. } => assert_eq!(threshold, brute_force_stump(&xs1, &ys)),
            _ => panic!("expected a split"),
        }
    }

    #[test]
    fn min_leaf_equal_to_n_predicts_priors() {
        let xs = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let ys = [0, 0, 0, 1];
        let config = TreeConfig {
            min_leaf: 4,
            ..TreeConfig::default()
        };
        let tree = tree_fit(&xs, &ys, 2, config, &mut rng()).unwrap();
        assert_eq!(tree.depth(), 0);
        assert_eq!(tree.tree_predict_proba(&[3.0]), vec![0.75, 0.25]);
    }

    #[test]
    fn ties_prefer_lowest_feature() {
        // Both columns separate the classes identically.
        let xs = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let tree = tree_fit(&xs, &[0, 1], 2, TreeConfig::default(), &mut rng()).unwrap();
        assert_eq!(tree.split_features(), vec![0]);
    }

    #[test]
    fn leaf_counts_sum_to_samples() {
        let xs: Vec<Vec<f64>> = (0..30).map(|i| vec![(i % 7) as f64, (i % 5) as f64]).collect();
        let ys: Vec<usize> = (0..30).map(|i| (i * 13 % 3) as usize).collect();
        let tree = tree_fit(&xs, &ys, 3, TreeConfig::default(), &mut rng()).unwrap();
        let total: usize = tree.leaves().iter().map(|c| c.iter().sum::<usize>()).sum();
        assert_eq!(total, 30);
    }

    #[test]
    fn empty_data_is_rejected() {
        let xs: Vec<Vec<f64>> = vec![];
        assert!(tree_fit(&xs, &[], 2, TreeConfig::default(), &mut rng()).is_err());
    }
}
