//! Binary soft-margin SVM solved in the dual with SMO.
//!
//! Solves `min ½αᵀQα − eᵀα` subject to `yᵀα = 0`, `0 ≤ α ≤ C`, where
//! `Q_ij = y_i y_j K_ij`. Each step updates the maximal KKT-violating pair.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qkernel::KernelMatrix;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig<T> {
    /// Box constraint (margin budget).
    pub c: T,
    /// Stop once the maximal KKT violation drops below this value.
    pub tolerance: T,
    pub max_iter: usize,
}

impl<T: Real> Default for SvmConfig<T> {
    fn default() -> Self {
        Self {
            c: T::one(),
            tolerance: T::lit(1e-3),
            max_iter: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmBinaryModel<T> {
    /// Indices into the training set with `α > 0`.
    pub support_indices: Vec<usize>,
    /// Dual coefficients aligned with `support_indices`.
    pub alphas: Vec<T>,
    /// Labels (±1) aligned with `support_indices`.
    pub labels: Vec<i8>,
    pub bias: T,
    pub c: T,
    pub iterations: usize,
    /// Maximal KKT violation at exit.
    pub max_violation: T,
    pub converged: bool,
}

impl<T: Real> SvmBinaryModel<T> {
    /// Dual objective `Σα − ½ΣΣ α_i α_j y_i y_j K_ij` on the training kernel.
    pub fn dual_objective(&self, k: &KernelMatrix<T>) -> T {
        let mut quad = T::zero();
        for (a, (&i, &yi)) in self.alphas.iter().zip(self.support_indices.iter().zip(&self.labels)) {
            for (b, (&j, &yj)) in self.alphas.iter().zip(self.support_indices.iter().zip(&self.labels)) {
                quad += *a * *b * T::from_i8(yi * yj).unwrap() * k.get(i, j);
            }
        }
        self.alphas.iter().copied().sum::<T>() - T::lit(0.5) * quad
    }

    /// `Σ α_i y_i` over the support set.
    pub fn equality_residual(&self) -> T {
        self.alphas
            .iter()
            .zip(&self.labels)
            .map(|(a, &y)| *a * T::from_i8(y).unwrap())
            .sum()
    }
}

/// `f(x) = Σ α_i y_i k(x, x_i) + b` for a row of kernel values against the support set.
pub fn svm_decision<T: Real>(model: &SvmBinaryModel<T>, k_row: &[T]) -> Result<T> {
    if k_row.len() != model.alphas.len() {
        return Err(Error::Dimension(format!(
            "kernel row of length {} for {} support vectors",
            k_row.len(),
            model.alphas.len()
        )));
    }
    Ok(model
        .alphas
        .iter()
        .zip(&model.labels)
        .zip(k_row)
        .map(|((a, &y), k)| *a * T::from_i8(y).unwrap() * *k)
        .sum::<T>()
        + model.bias)
}

fn validate_kernel<T: Real>(k: &KernelMatrix<T>, n: usize) -> Result<()> {
    if k.rows() != k.cols() {
        return Err(Error::Dimension(format!(
            "kernel matrix is {}×{}",
            k.rows(),
            k.cols()
        )));
    }
    if k.rows() != n {
        return Err(Error::Dimension(format!(
            "{} labels for a {}-row kernel",
            n,
            k.rows()
        )));
    }
    let tol = T::lit(1e-8);
    if k.max_asymmetry() > tol {
        return Err(Error::Solver("kernel matrix is not symmetric".into()));
    }
    if (0..n).any(|i| k.get(i, i) < -tol) {
        return Err(Error::Solver("kernel matrix has a negative diagonal entry".into()));
    }
    Ok(())
}

/// Trains a binary SVM on a precomputed kernel with labels in `{−1, +1}`.
pub fn svm_train_binary<T: Real>(
    k: &KernelMatrix<T>,
    y: &[i8],
    config: &SvmConfig<T>,
) -> Result<SvmBinaryModel<T>> {
    let n = y.len();
    validate_kernel(k, n)?;
    if let Some(bad) = y.iter().find(|&&v| v != 1 && v != -1) {
        return Err(Error::Domain(format!("binary SVM label {bad} is not ±1")));
    }
    if !(y.contains(&1) && y.contains(&-1)) {
        return Err(Error::Degenerate("binary SVM needs both classes".into()));
    }
    if !(config.c > T::zero()) {
        return Err(Error::Config("SVM C must be positive".into()));
    }

    let c = config.c;
    let yf: Vec<T> = y.iter().map(|&v| T::from_i8(v).unwrap()).collect();
    let mut alpha = vec![T::zero(); n];
    let mut grad = vec![-T::one(); n];
    let tau = T::lit(1e-12);
    let psd_tol = T::lit(1e-8);

    let in_up = |t: usize, a: &[T]| (y[t] == 1 && a[t] < c) || (y[t] == -1 && a[t] > T::zero());
    let in_low = |t: usize, a: &[T]| (y[t] == 1 && a[t] > T::zero()) || (y[t] == -1 && a[t] < c);

    let mut iterations = 0;
    let mut violation;
    loop {
        // Maximal violating pair.
        let (mut i, mut gmax) = (usize::MAX, T::neg_infinity());
        let (mut j, mut gmin) = (usize::MAX, T::infinity());
        for t in 0..n {
            let v = -yf[t] * grad[t];
            if in_up(t, &alpha) && v > gmax {
                gmax = v;
                i = t;
            }
            if in_low(t, &alpha) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        violation = if i == usize::MAX || j == usize::MAX {
            T::zero()
        } else {
            gmax - gmin
        };
        if violation < config.tolerance || iterations >= config.max_iter {
            break;
        }
        iterations += 1;

        let mut quad = k.get(i, i) + k.get(j, j) - T::lit(2.0) * k.get(i, j);
        if quad < -psd_tol {
            return Err(Error::Solver(format!(
                "negative curvature {quad} on pair ({i}, {j}): kernel is not PSD"
            )));
        }
        if quad <= tau {
            quad = tau;
        }
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > T::zero() {
                if alpha[j] < T::zero() {
                    alpha[j] = T::zero();
                    alpha[i] = diff;
                }
            } else if alpha[i] < T::zero() {
                alpha[i] = T::zero();
                alpha[j] = -diff;
            }
            if diff > T::zero() {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < T::zero() {
                alpha[j] = T::zero();
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < T::zero() {
                alpha[i] = T::zero();
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += yf[t] * (yf[i] * k.get(t, i) * di + yf[j] * k.get(t, j) * dj);
        }
    }

    // Bias from free vectors, falling back to the midpoint of the feasible interval.
    let (mut ub, mut lb) = (T::infinity(), T::neg_infinity());
    let (mut free_sum, mut free_count) = (T::zero(), 0usize);
    for t in 0..n {
        let yg = yf[t] * grad[t];
        if alpha[t] >= c {
            if y[t] == -1 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= T::zero() {
            if y[t] == 1 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_sum += yg;
            free_count += 1;
        }
    }
    let rho = if free_count > 0 {
        free_sum / T::from_count(free_count)
    } else {
        (ub + lb) * T::lit(0.5)
    };

    let support_indices: Vec<usize> = (0..n).filter(|&t| alpha[t] > T::zero()).collect();
    Ok(SvmBinaryModel {
        alphas: support_indices.iter().map(|&t| alpha[t]).collect(),
        labels: support_indices.iter().map(|&t| y[t]).collect(),
        support_indices,
        bias: -rho,
        c,
        iterations,
        max_violation: violation,
        converged: violation < config.tolerance,
    })
}
