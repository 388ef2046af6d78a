//! Fidelity quantum kernel via compute–uncompute, and Gram matrix assembly.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encode::{feature_map_state, zz_feature_map, FeatureMapSpec};
use crate::error::{Error, Result};
use crate::qsim::{inner_product, inverse_circuit, StateVector};
use crate::scalar::Real;

/// `K(x_i, x_j)`: prepares `U(x_i)|0…0⟩`, applies `U(x_j)†` and returns the
/// probability of measuring all zeros.
pub fn fidelity<T: Real>(spec: &FeatureMapSpec, x_i: &[T], x_j: &[T]) -> Result<T> {
    let compute = zz_feature_map(spec, x_i)?;
    let uncompute = inverse_circuit(&zz_feature_map(spec, x_j)?)?;
    let state = StateVector::zero_state(spec.num_qubits())?
        .apply_circuit(&compute, &[])?
        .apply_circuit(&uncompute, &[])?;
    Ok(state.amplitudes()[0].norm_sqr())
}

/// `|⟨a|b⟩|²` for already prepared feature states.
pub fn state_fidelity<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> Result<T> {
    Ok(inner_product(a, b)?.norm_sqr())
}

/// Real kernel matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<T>,
    symmetric: bool,
}

impl<T: Real> KernelMatrix<T> {
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self {
            rows,
            cols,
            entries,
            symmetric: false,
        }
    }

    /// Square matrix over one sample set; the caller guarantees symmetry.
    pub fn symmetric_from_fn(n: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut m = Self::from_fn(n, n, |i, j| if i <= j { f(i, j) } else { T::zero() });
        for i in 0..n {
            for j in 0..i {
                m.entries[i * n + j] = m.entries[j * n + i];
            }
        }
        m.symmetric = true;
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>, symmetric: bool) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged kernel rows".into()));
        }
        if symmetric && r != c {
            return Err(Error::Dimension(format!("{r}×{c} matrix cannot be symmetric")));
        }
        Ok(Self {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
            symmetric,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// Principal submatrix over `indices` (rows and columns).
    pub fn submatrix(&self, indices: &[usize]) -> Self {
        let mut m = Self::from_fn(indices.len(), indices.len(), |a, b| {
            self.get(indices[a], indices[b])
        });
        m.symmetric = self.symmetric;
        m
    }

    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows.min(self.cols) {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Smallest eigenvalue of a square matrix (symmetrised), in double precision.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        if self.rows != self.cols || self.rows == 0 {
            return Err(Error::Dimension(format!(
                "eigenvalues of a {}×{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            0.5 * (self.get(i, j).to_f64_lossy() + self.get(j, i).to_f64_lossy())
        });
        Ok(m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min))
    }

    /// Header-free, row-major CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for i in 0..self.rows {
            w.write_record(self.row(i).iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_samples<T>(spec: &FeatureMapSpec, samples: &[Vec<T>]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Size("kernel over an empty sample set".into()));
    }
    if let Some(bad) = samples.iter().find(|s| s.len() != spec.num_features) {
        return Err(Error::Arity {
            expected: spec.num_features,
            got: bad.len(),
        });
    }
    Ok(())
}

/// Cross kernel `K[i][j] = fidelity(a_i, b_j)`. Passing the same slice twice yields
/// the symmetric Gram matrix with only the upper triangle evaluated.
pub fn kernel_matrix<T: Real>(spec: &FeatureMapSpec, a: &[Vec<T>], b: &[Vec<T>]) -> Result<KernelMatrix<T>> {
    if std::ptr::eq(a, b) {
        return gram_matrix(spec, a);
    }
    check_samples(spec, a)?;
    check_samples(spec, b)?;
    let rows = a
        .par_iter()
        .map(|xi| b.iter().map(|xj| fidelity(spec, xi, xj)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    KernelMatrix::from_rows(rows, false)
}

/// Symmetric Gram matrix over one sample set.
pub fn gram_matrix<T: Real>(spec: &FeatureMapSpec, samples: &[Vec<T>]) -> Result<KernelMatrix<T>> {
    check_samples(spec, samples)?;
    let n = samples.len();
    let upper = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| fidelity(spec, &samples[i], &samples[j]))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KernelMatrix::symmetric_from_fn(n, |i, j| upper[i][j - i]))
}

/// Prepared feature-map states for repeated kernel evaluations against a fixed set.
#[derive(Clone, Debug)]
pub struct FeatureStates<T> {
    spec: FeatureMapSpec,
    states: Vec<StateVector<T>>,
}

impl<T: Real> FeatureStates<T> {
    pub fn prepare(spec: FeatureMapSpec, samples: &[Vec<T>]) -> Result<Self> {
        let states = samples
            .iter()
            .map(|x| feature_map_state(&spec, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { spec, states })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Kernel values of `x` against every prepared state.
    pub fn kernel_row(&self, x: &[T]) -> Result<Vec<T>> {
        let probe = feature_map_state(&self.spec, x)?;
        self.states.iter().map(|s| state_fidelity(s, &probe)).collect()
    }
}
