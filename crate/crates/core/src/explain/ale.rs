use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cml::Classifier;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Accumulated local effects of one feature on one class probability.
///
/// `edges`, `accumulated` and `centered` have one entry per grid edge; the
/// per-interval vectors have one entry per interval (`edges.len() - 1`).
/// A sample in interval `k` (1-based) is assigned the curve value at edge `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AleCurve<T> {
    pub feature: usize,
    pub class: usize,
    pub edges: Vec<T>,
    pub interval_effects: Vec<T>,
    pub counts: Vec<usize>,
    pub accumulated: Vec<T>,
    pub centered: Vec<T>,
}

impl<T: Real> AleCurve<T> {
    pub fn num_intervals(&self) -> usize {
        self.counts.len()
    }

    /// Count-weighted mean of the centered curve; zero up to rounding.
    pub fn weighted_mean(&self) -> T {
        let n: usize = self.counts.iter().sum();
        let total = self
            .counts
            .iter()
            .zip(&self.centered[1..])
            .fold(T::zero(), |acc, (&c, &v)| acc + T::from_count(c) * v);
        total / T::from_count(n)
    }

    /// Range of the centered curve.
    pub fn spread(&self) -> T {
        let max = self.centered.iter().copied().fold(T::neg_infinity(), T::max);
        let min = self.centered.iter().copied().fold(T::infinity(), T::min);
        max - min
    }
}

/// Quantile grid: the minimum followed by the inverse-CDF quantiles at k/K,
/// with repeated values collapsed. Every edge is an observed value.
fn quantile_edges<T: Real>(column: &[T], num_intervals: usize) -> Vec<T> {
    let mut sorted = column.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite feature values"));
    let n = sorted.len();
    let mut edges = vec![sorted[0]];
    for k in 1..=num_intervals {
        let idx = (k * n).div_ceil(num_intervals).max(1) - 1;
        let z = sorted[idx];
        if z > *edges.last().unwrap() {
            edges.push(z);
        }
    }
    edges
}

/// Right-closed interval index (1-based); the minimum falls in interval 1.
fn interval_of<T: Real>(edges: &[T], v: T) -> usize {
    edges.partition_point(|&z| z < v).clamp(1, edges.len() - 1)
}

fn validate<T: Real, M: Classifier<T> + ?Sized>(model: &M, xs: &[Vec<T>], feature: usize, num_intervals: usize) -> Result<()> {
    if num_intervals < 2 {
        return Err(Error::Config("ALE needs at least two intervals".into()));
    }
    if xs.is_empty() {
        return Err(Error::Size("ALE needs samples".into()));
    }
    let p = model.num_features();
    if xs.iter().any(|x| x.len() != p) {
        return Err(Error::Dimension(format!("rows must have {p} features")));
    }
    if feature >= p {
        return Err(Error::Dimension(format!("feature {feature} outside 0..{p}")));
    }
    if xs.iter().any(|x| !x[feature].is_finite()) {
        return Err(Error::Data(format!("non-finite value in feature {feature}")));
    }
    Ok(())
}

/// ALE curves of `feature` for every class, sharing one pass of predictions.
pub fn ale_curves<T: Real, M: Classifier<T> + ?Sized>(
    model: &M,
    xs: &[Vec<T>],
    feature: usize,
    num_intervals: usize,
) -> Result<Vec<AleCurve<T>>> {
    validate(model, xs, feature, num_intervals)?;
    let column: Vec<T> = xs.iter().map(|x| x[feature]).collect();
    let edges = quantile_edges(&column, num_intervals);
    if edges.len() < 2 {
        return Err(Error::Degenerate(format!("feature {feature} is constant")));
    }
    let intervals = edges.len() - 1;
    let classes = model.num_classes();

    let diffs = xs
        .par_iter()
        .map(|x| {
            let k = interval_of(&edges, x[feature]);
            let mut row = x.clone();
            row[feature] = edges[k];
            let upper = model.predict_proba(&row)?;
            row[feature] = edges[k - 1];
            let lower = model.predict_proba(&row)?;
            Ok((k, upper.iter().zip(&lower).map(|(&u, &l)| u - l).collect::<Vec<T>>()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut counts = vec![0usize; intervals];
    let mut sums = vec![vec![T::zero(); intervals]; classes];
    for (k, d) in &diffs {
        counts[k - 1] += 1;
        for c in 0..classes {
            sums[c][k - 1] += d[c];
        }
    }
    let n = T::from_count(xs.len());
    Ok((0..classes)
        .map(|c| {
            let interval_effects: Vec<T> = sums[c]
                .iter()
                .zip(&counts)
                .map(|(&s, &m)| if m == 0 { T::zero() } else { s / T::from_count(m) })
                .collect();
            let mut accumulated = vec![T::zero()];
            for &e in &interval_effects {
                accumulated.push(*accumulated.last().unwrap() + e);
            }
            let offset = counts
                .iter()
                .zip(&accumulated[1..])
                .fold(T::zero(), |acc, (&m, &a)| acc + T::from_count(m) * a)
                / n;
            let centered = accumulated.iter().map(|&a| a - offset).collect();
            AleCurve {
                feature,
                class: c,
                edges: edges.clone(),
                interval_effects,
                counts: counts.clone(),
                accumulated,
                centered,
            }
        })
        .collect())
}

/// ALE curve of `feature` for class `class`.
pub fn ale_curve<T: Real, M: Classifier<T> + ?Sized>(
    model: &M,
    xs: &[Vec<T>],
    feature: usize,
    class: usize,
    num_intervals: usize,
) -> Result<AleCurve<T>> {
    if class >= model.num_classes() {
        return Err(Error::Label(format!("class {class} outside 0..{}", model.num_classes())));
    }
    let mut curves = ale_curves(model, xs, feature, num_intervals)?;
    Ok(curves.swap_remove(class))
}

/// Per-feature importance: the largest centered-curve range over `classes`.
pub fn ale_importance<T: Real, M: Classifier<T> + ?Sized>(
    model: &M,
    xs: &[Vec<T>],
    classes: &[usize],
    num_intervals: usize,
) -> Result<Vec<T>> {
    if let Some(&c) = classes.iter().find(|&&c| c >= model.num_classes()) {
        return Err(Error::Label(format!("class {c} outside 0..{}", model.num_classes())));
    }
    (0..model.num_features())
        .map(|j| {
            let curves = ale_curves(model, xs, j, num_intervals)?;
            Ok(classes
                .iter()
                .map(|&c| curves[c].spread())
                .fold(T::zero(), T::max))
        })
        .collect()
}
