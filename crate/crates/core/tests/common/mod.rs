#![allow(dead_code)]

use qexplain::cml::{Classifier, ModelKind};
use qexplain::pipeline::{bundled_iris, prepare, ExperimentConfig, Prepared};
use qexplain::qkernel::KernelMatrix;
use qexplain::qsim::{Gate, ParameterizedCircuit};
use qexplain::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Split seed used for the Iris reproduction checks.
pub const IRIS_SEED: u64 = 0;

pub fn iris_config() -> ExperimentConfig {
    ExperimentConfig { seed: IRIS_SEED, ..ExperimentConfig::new() }
}

pub fn iris_prepared() -> (ExperimentConfig, Prepared) {
    let config = iris_config();
    let prepared = prepare(&bundled_iris(), &config).unwrap();
    (config, prepared)
}

pub fn random_circuit(seed: u64, num_qubits: usize, len: usize) -> ParameterizedCircuit<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gates: Vec<Gate<f64>> = (0..len)
        .map(|_| {
            let target = rng.gen_range(0..num_qubits);
            let angle = rng.gen_range(-PI..PI);
            match rng.gen_range(0..if num_qubits > 1 { 5 } else { 4 }) {
                0 => Gate::H { target },
                1 => Gate::Ry { target, angle },
                2 => Gate::Rz { target, angle },
                3 => Gate::Phase { target, angle },
                _ => {
                    let control = (target + rng.gen_range(1..num_qubits)) % num_qubits;
                    Gate::Cx { control, target }
                }
            }
        })
        .collect();
    ParameterizedCircuit::from_gates(num_qubits, gates).unwrap()
}

/// Maximises `Σα − ½ αᵀQα` over `0 ≤ α ≤ C`, `yᵀα = 0` by accelerated
/// projected gradient; returns the optimal objective.
pub fn projected_gradient_dual(k: &KernelMatrix<f64>, y: &[i8], c: f64, iterations: usize) -> (Vec<f64>, f64) {
    let n = y.len();
    let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    let q = |i: usize, j: usize| yf[i] * yf[j] * k.get(i, j);
    let lipschitz = (0..n).map(|i| (0..n).map(|j| q(i, j).abs()).sum::<f64>()).fold(0.0, f64::max);
    let project = |v: &[f64]| -> Vec<f64> {
        let at = |lambda: f64| -> Vec<f64> { (0..n).map(|i| (v[i] - lambda * yf[i]).clamp(0.0, c)).collect() };
        let h = |lambda: f64| -> f64 { at(lambda).iter().zip(&yf).map(|(a, y)| a * y).sum() };
        let bound = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c + 1.0;
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(0.5 * (lo + hi))
    };
    let objective = |a: &[f64]| -> f64 {
        let quad: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| a[i] * a[j] * q(i, j)).sum();
        a.iter().sum::<f64>() - 0.5 * quad
    };
    let mut alpha = vec![0.0; n];
    let mut z = alpha.clone();
    let mut t = 1.0f64;
    for _ in 0..iterations {
        let grad: Vec<f64> = (0..n).map(|i| 1.0 - (0..n).map(|j| q(i, j) * z[j]).sum::<f64>()).collect();
        let step: Vec<f64> = (0..n).map(|i| z[i] + grad[i] / lipschitz).collect();
        let next = project(&step);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = (0..n).map(|i| next[i] + (t - 1.0) / t_next * (next[i] - alpha[i])).collect();
        // Restart momentum when the objective drops.
        if objective(&next) < objective(&alpha) {
            z = next.clone();
            t = 1.0;
        } else {
            t = t_next;
        }
        alpha = next;
    }
    let value = objective(&alpha);
    (alpha, value)
}

/// Twenty points in two overlapping 2-D clusters with ±1 labels.
pub fn blob_problem(seed: u64) -> (Vec<Vec<f64>>, Vec<i8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..20 {
        let y: i8 = if i % 2 == 0 { 1 } else { -1 };
        let centre = f64::from(y) * 0.8;
        xs.push(vec![centre + rng.gen_range(-1.2..1.2), centre + rng.gen_range(-1.2..1.2)]);
        ys.push(y);
    }
    (xs, ys)
}

/// Class 0 outputs `Σ w_i x_i`, class 1 its complement.
pub struct Additive(pub Vec<f64>);

impl Classifier<f64> for Additive {
    fn kind(&self) -> ModelKind {
        ModelKind::Svc
    }
    fn num_classes(&self) -> usize {
        2
    }
    fn num_features(&self) -> usize {
        self.0.len()
    }
    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        let s: f64 = self.0.iter().zip(x).map(|(w, v)| w * v).sum();
        Ok(vec![s, 1.0 - s])
    }
}

/// `p_1 = clamp(0.1 + 0.8·x_0)` on two features; feature 1 is ignored.
pub struct LinearResponse;

impl Classifier<f64> for LinearResponse {
    fn kind(&self) -> ModelKind {
        ModelKind::Svc
    }
    fn num_classes(&self) -> usize {
        2
    }
    fn num_features(&self) -> usize {
        2
    }
    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        let p = (0.1 + 0.8 * x[0]).clamp(0.0, 1.0);
        Ok(vec![1.0 - p, p])
    }
}

/// Symmetric in features 0 and 1 and constant in feature 2.
pub struct SymmetricPair;

impl Classifier<f64> for SymmetricPair {
    fn kind(&self) -> ModelKind {
        ModelKind::Rf
    }
    fn num_classes(&self) -> usize {
        1
    }
    fn num_features(&self) -> usize {
        3
    }
    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![(x[0] * x[1]).sin() + (x[0] + x[1]).powi(2)])
    }
}

/// Seeded uniform rows in [0, 1)^p.
pub fn uniform_rows(seed: u64, n: usize, p: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..p).map(|_| rng.gen::<f64>()).collect()).collect()
}
