use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ansatz::{build_ansatz, AnsatzSpec};
use super::cobyla::{cobyla_minimize, OptimizerConfig};
use crate::cml::{check_labels, check_rows, Classifier, ModelKind};
use crate::encode::{feature_map_state, FeatureMapSpec};
use crate::error::{Error, Result};
use crate::qsim::{ParameterizedCircuit, StateVector};
use crate::scalar::Real;

/// Maps each basis-state index to a class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Readout {
    pub num_classes: usize,
    /// `classes[i]` is the class of basis state `i`.
    pub classes: Vec<usize>,
}

impl Readout {
    /// `class(i) = i mod num_classes`.
    pub fn modulo(num_qubits: usize, num_classes: usize) -> Result<Self> {
        let dim = 1usize << num_qubits;
        Self::new(num_classes, (0..dim).map(|i| i % num_classes.max(1)).collect())
    }

    /// Validates that the mapping is total over the basis and onto the classes.
    pub fn new(num_classes: usize, classes: Vec<usize>) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::Config("readout needs at least two classes".into()));
        }
        if !classes.len().is_power_of_two() || classes.len() < 2 {
            return Err(Error::Config(format!(
                "readout covers {} basis states, not a power of two",
                classes.len()
            )));
        }
        let mut hit = vec![false; num_classes];
        for &c in &classes {
            if c >= num_classes {
                return Err(Error::Config(format!("readout class {c} ≥ {num_classes}")));
            }
            hit[c] = true;
        }
        if let Some(missing) = hit.iter().position(|h| !h) {
            return Err(Error::Config(format!("no basis state reads out class {missing}")));
        }
        Ok(Self {
            num_classes,
            classes,
        })
    }

    pub fn aggregate<T: Real>(&self, probabilities: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.num_classes];
        for (p, &c) in probabilities.iter().zip(&self.classes) {
            out[c] += *p;
        }
        out
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VqcModel<T> {
    pub feature_map: FeatureMapSpec,
    pub ansatz: AnsatzSpec,
    pub params: Vec<T>,
    pub readout: Readout,
    pub optimizer: OptimizerConfig,
    /// Seed used for parameter initialisation.
    pub seed: u64,
    /// Best loss after each objective evaluation.
    pub training_log: Vec<T>,
    pub budget_exhausted: bool,
    #[serde(skip)]
    circuit: OnceLock<ParameterizedCircuit<T>>,
}

impl<T: Real> VqcModel<T> {
    pub fn new(
        feature_map: FeatureMapSpec,
        ansatz: AnsatzSpec,
        params: Vec<T>,
        readout: Readout,
    ) -> Result<Self> {
        if ansatz.num_qubits != feature_map.num_qubits() {
            return Err(Error::Config(format!(
                "ansatz on {} qubits after a {}-qubit feature map",
                ansatz.num_qubits,
                feature_map.num_qubits()
            )));
        }
        if params.len() != ansatz.num_parameters() {
            return Err(Error::Arity {
                expected: ansatz.num_parameters(),
                got: params.len(),
            });
        }
        if readout.classes.len() != 1 << ansatz.num_qubits {
            return Err(Error::Config("readout does not cover every basis state".into()));
        }
        Ok(Self {
            feature_map,
            ansatz,
            params,
            readout,
            optimizer: OptimizerConfig::default(),
            seed: 0,
            training_log: Vec::new(),
            budget_exhausted: false,
            circuit: OnceLock::new(),
        })
    }

    pub fn num_classes(&self) -> usize {
        self.readout.num_classes
    }

    fn circuit(&self) -> Result<&ParameterizedCircuit<T>> {
        if self.circuit.get().is_none() {
            let _ = self.circuit.set(build_ansatz(&self.ansatz)?);
        }
        Ok(self.circuit.get().expect("ansatz built"))
    }
}

fn class_probabilities<T: Real>(
    encoded: &StateVector<T>,
    ansatz: &ParameterizedCircuit<T>,
    params: &[T],
    readout: &Readout,
) -> Result<Vec<T>> {
    let state = encoded.apply_circuit(ansatz, params)?;
    Ok(readout.aggregate(&state.probabilities()))
}

/// Class probabilities for `x`: feature map, then ansatz, then readout aggregation.
pub fn vqc_forward<T: Real>(model: &VqcModel<T>, x: &[T]) -> Result<Vec<T>> {
    let encoded = feature_map_state(&model.feature_map, x)?;
    class_probabilities(&encoded, model.circuit()?, &model.params, &model.readout)
}

fn cross_entropy<T: Real>(probabilities: &[Vec<T>], ys: &[usize]) -> T {
    let floor = T::lit(1e-12);
    let total: T = probabilities
        .iter()
        .zip(ys)
        .map(|(p, &y)| -p[y].max(floor).min(T::one()).ln())
        .sum();
    total / T::from_count(ys.len().max(1))
}

/// Mean categorical cross-entropy with probabilities clamped to `[1e-12, 1]`.
pub fn vqc_loss<T: Real>(model: &VqcModel<T>, xs: &[Vec<T>], ys: &[usize]) -> Result<T> {
    check_rows(xs, ys)?;
    check_labels(ys, model.num_classes())?;
    let probabilities = xs
        .iter()
        .map(|x| vqc_forward(model, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(cross_entropy(&probabilities, ys))
}

/// Trains the ansatz parameters with COBYLA from a seeded uniform `[−π, π]` start.
pub fn vqc_train<T: Real>(
    feature_map: FeatureMapSpec,
    ansatz: AnsatzSpec,
    readout: Readout,
    optimizer: OptimizerConfig,
    xs: &[Vec<T>],
    ys: &[usize],
    seed: u64,
) -> Result<VqcModel<T>> {
    check_rows(xs, ys)?;
    check_labels(ys, readout.num_classes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi = std::f64::consts::PI;
    let init: Vec<T> = (0..ansatz.num_parameters())
        .map(|_| T::lit(rng.gen_range(-pi..=pi)))
        .collect();
    let mut model = VqcModel::new(feature_map, ansatz, init.clone(), readout)?;
    model.optimizer = optimizer;
    model.seed = seed;

    // The feature map does not depend on the trained parameters.
    let encoded = xs
        .iter()
        .map(|x| feature_map_state(&feature_map, x))
        .collect::<Result<Vec<_>>>()?;
    let circuit = model.circuit()?.clone();
    let readout = model.readout.clone();
    let objective = |params: &[T]| -> T {
        let probabilities: Result<Vec<Vec<T>>> = encoded
            .iter()
            .map(|s| class_probabilities(s, &circuit, params, &readout))
            .collect();
        match probabilities {
            Ok(p) => cross_entropy(&p, ys),
            Err(_) => T::nan(),
        }
    };
    let result = cobyla_minimize(objective, &init, &optimizer)?;
    model.params = result.x;
    model.training_log = result.trace;
    model.budget_exhausted = result.budget_exhausted;
    Ok(model)
}

impl<T: Real> Classifier<T> for VqcModel<T> {
    fn kind(&self) -> ModelKind {
        ModelKind::Vqc
    }

    fn num_classes(&self) -> usize {
        self.readout.num_classes
    }

    fn num_features(&self) -> usize {
        self.feature_map.num_features
    }

    fn predict_proba(&self, x: &[T]) -> Result<Vec<T>> {
        vqc_forward(self, x)
    }
}
