//! Classical-to-quantum encodings and the second-order Pauli-Z (ZZ) feature map.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{Gate, ParameterizedCircuit, StateVector, MAX_QUBITS};
use crate::scalar::Real;

/// Computational basis state for a bit string; `bits[q]` is qubit `q` (little-endian).
pub fn basis_encode<T: Real>(bits: &[u8]) -> Result<StateVector<T>> {
    let mut index = 0usize;
    for (q, &b) in bits.iter().enumerate() {
        match b {
            0 => {}
            1 => index |= 1 << q,
            other => return Err(Error::Domain(format!("bit {q} has non-binary value {other}"))),
        }
    }
    StateVector::basis_state(bits.len(), index)
}

/// Zero-pads `x` to a power-of-two length (at least 2) and normalises it into amplitudes.
pub fn amplitude_encode<T: Real>(x: &[T]) -> Result<StateVector<T>> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite entry in amplitude encoding".into()));
    }
    let norm = x.iter().map(|v| *v * *v).sum::<T>().sqrt();
    if norm == T::zero() {
        return Err(Error::Degenerate("cannot amplitude-encode an all-zero vector".into()));
    }
    let dim = x.len().next_power_of_two().max(2);
    let mut amps = vec![Complex::new(T::zero(), T::zero()); dim];
    for (a, v) in amps.iter_mut().zip(x) {
        *a = Complex::new(*v / norm, T::zero());
    }
    StateVector::from_amplitudes(amps)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationAxis {
    Y,
    Z,
}

/// One rotation per qubit with angle `x[q]`.
pub fn angle_encode<T: Real>(x: &[T], axis: RotationAxis) -> Result<ParameterizedCircuit<T>> {
    ParameterizedCircuit::from_gates(
        x.len(),
        x.iter().enumerate().map(|(target, &angle)| match axis {
            RotationAxis::Y => Gate::Ry { target, angle },
            RotationAxis::Z => Gate::Rz { target, angle },
        }),
    )
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entanglement {
    #[default]
    Linear,
    Full,
}

impl Entanglement {
    /// Qubit pairs coupled by this pattern, in gate order.
    pub fn pairs(self, num_qubits: usize) -> Vec<(usize, usize)> {
        match self {
            Entanglement::Linear => (1..num_qubits).map(|j| (j - 1, j)).collect(),
            Entanglement::Full => (0..num_qubits)
                .flat_map(|i| (i + 1..num_qubits).map(move |j| (i, j)))
                .collect(),
        }
    }
}

pub const MAX_FEATURE_MAP_REPS: usize = 8;

/// ZZ feature map configuration: one qubit per feature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMapSpec {
    pub num_features: usize,
    pub reps: usize,
    #[serde(default)]
    pub entanglement: Entanglement,
}

impl FeatureMapSpec {
    pub fn new(num_features: usize, reps: usize, entanglement: Entanglement) -> Result<Self> {
        let spec = Self {
            num_features,
            reps,
            entanglement,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_features == 0 || self.num_features > MAX_QUBITS {
            return Err(Error::Size(format!(
                "feature map needs 1..={MAX_QUBITS} features, got {}",
                self.num_features
            )));
        }
        if !(1..=MAX_FEATURE_MAP_REPS).contains(&self.reps) {
            return Err(Error::Config(format!(
                "feature map reps must be in 1..={MAX_FEATURE_MAP_REPS}, got {}",
                self.reps
            )));
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_features
    }

    /// Same map with one fewer feature, for leave-one-out retraining.
    pub fn without_feature(&self) -> Result<Self> {
        Self::new(self.num_features - 1, self.reps, self.entanglement)
    }
}

/// Pairwise data map `(π − a)(π − b)`.
pub fn pair_phase<T: Real>(a: T, b: T) -> T {
    (T::PI() - a) * (T::PI() - b)
}

/// Bound ZZ feature map circuit `U_Φ(x)`.
///
/// Each repetition applies H to every qubit, `PHASE(2·x_i)` on qubit `i`, then for
/// every entangled pair `(i, j)`: `CX(i→j)`, `PHASE(2·(π−x_i)(π−x_j))` on `j`, `CX(i→j)`.
pub fn zz_feature_map<T: Real>(spec: &FeatureMapSpec, x: &[T]) -> Result<ParameterizedCircuit<T>> {
    spec.validate()?;
    if x.len() != spec.num_features {
        return Err(Error::Arity {
            expected: spec.num_features,
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite feature value".into()));
    }
    let n = spec.num_features;
    let two = T::lit(2.0);
    let pairs = spec.entanglement.pairs(n);
    let mut gates = Vec::with_capacity(spec.reps * (2 * n + 3 * pairs.len()));
    for _ in 0..spec.reps {
        gates.extend((0..n).map(|target| Gate::H { target }));
        gates.extend(x.iter().enumerate().map(|(target, &xi)| Gate::Phase {
            target,
            angle: two * xi,
        }));
        for &(i, j) in &pairs {
            let cx = Gate::Cx {
                control: i,
                target: j,
            };
            gates.push(cx);
            gates.push(Gate::Phase {
                target: j,
                angle: two * pair_phase(x[i], x[j]),
            });
            gates.push(cx);
        }
    }
    ParameterizedCircuit::from_gates(n, gates)
}

/// `U_Φ(x)|0…0⟩`.
pub fn feature_map_state<T: Real>(spec: &FeatureMapSpec, x: &[T]) -> Result<StateVector<T>> {
    let circuit = zz_feature_map(spec, x)?;
    StateVector::zero_state(spec.num_qubits())?.apply_circuit(&circuit, &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::GateTemplate;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn basis_encoding_is_little_endian() {
        let s = basis_encode::<f64>(&[0]).unwrap();
        assert_eq!(s.probabilities(), vec![1.0, 0.0]);
        let s = basis_encode::<f64>(&[1, 0]).unwrap();
        assert_eq!(s.probabilities()[1], 1.0);
        let s = basis_encode::<f64>(&[1, 1]).unwrap();
        assert_eq!(s.probabilities()[3], 1.0);
        assert!(matches!(basis_encode::<f64>(&[0, 2]), Err(Error::Domain(_))));
    }

    #[test]
    fn amplitude_encoding_normalises_and_pads() {
        let s = amplitude_encode::<f64>(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.num_qubits(), 2);
        assert_eq!(s.amplitudes()[0].re, 1.0);
        let s = amplitude_encode::<f64>(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(s.amplitudes().iter().all(|a| (a.re - 0.5).abs() < 1e-15));
        let s = amplitude_encode::<f64>(&[3.0, 4.0]).unwrap();
        assert!((s.amplitudes()[0].re - 0.6).abs() < 1e-15);
        assert!((s.amplitudes()[1].re - 0.8).abs() < 1e-15);
        let s = amplitude_encode::<f64>(&[1.0, 2.0, 2.0]).unwrap();
        assert_eq!(s.dim(), 4);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(matches!(
            amplitude_encode::<f64>(&[0.0_f64, 0.0]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn angle_encoding() {
        let zero = StateVector::<f64>::zero_state(1).unwrap();
        let c = angle_encode(&[0.0], RotationAxis::Z).unwrap();
        let out = zero.apply_circuit(&c, &[]).unwrap();
        assert!((out.probabilities()[0] - 1.0).abs() < 1e-15);
        let c = angle_encode(&[PI], RotationAxis::Y).unwrap();
        let out = zero.apply_circuit(&c, &[]).unwrap();
        assert!(out.amplitudes()[0].norm() < 1e-12);
        assert!((out.amplitudes()[1].re - 1.0).abs() < 1e-12);
        assert_eq!(angle_encode(&[0.7, 0.2], RotationAxis::Y).unwrap().len(), 2);
    }

    #[test]
    fn zz_map_three_qubit_linear_layout() {
        let spec = FeatureMapSpec::new(3, 1, Entanglement::Linear).unwrap();
        let c = zz_feature_map(&spec, &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(c.len(), 12);
        let kinds: String = c
            .gates()
            .iter()
            .map(|g| match g {
                GateTemplate::H { .. } => 'H',
                GateTemplate::Phase { .. } => 'P',
                GateTemplate::Cx { .. } => 'X',
                _ => '?',
            })
            .collect();
        assert_eq!(kinds, "HHHPPPXPXXPX");
        assert_eq!(
            c.gates()[6],
            GateTemplate::Cx {
                control: 0,
                target: 1
            }
        );
        assert_eq!(
            c.gates()[9],
            GateTemplate::Cx {
                control: 1,
                target: 2
            }
        );
    }

    #[test]
    fn zz_map_single_qubit_state() {
        let a = 0.37;
        let spec = FeatureMapSpec::new(1, 1, Entanglement::Linear).unwrap();
        let s = feature_map_state(&spec, &[a]).unwrap();
        let e1 = Complex::from_polar(FRAC_1_SQRT_2, 2.0 * a);
        assert!((s.amplitudes()[0] - Complex::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        assert!((s.amplitudes()[1] - e1).norm() < 1e-12);
    }

    #[test]
    fn zz_pair_phase_vanishes_at_pi() {
        let spec = FeatureMapSpec::new(2, 1, Entanglement::Linear).unwrap();
        let c = zz_feature_map(&spec, &[PI, PI]).unwrap();
        assert_eq!(
            c.gates()[5],
            GateTemplate::Phase {
                target: 1,
                angle: crate::qsim::Angle::Const(0.0)
            }
        );
        assert_eq!(pair_phase(0.2, 0.9), pair_phase(0.9, 0.2));
    }

    #[test]
    fn full_entanglement_pairs_are_lexicographic() {
        assert_eq!(
            Entanglement::Full.pairs(4),
            vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        );
        assert_eq!(Entanglement::Linear.pairs(1), vec![]);
    }

    #[test]
    fn feature_map_validation() {
        assert!(FeatureMapSpec::new(4, 0, Entanglement::Linear).is_err());
        assert!(FeatureMapSpec::new(4, 9, Entanglement::Linear).is_err());
        let spec = FeatureMapSpec::new(2, 2, Entanglement::Full).unwrap();
        assert!(matches!(
            zz_feature_map(&spec, &[0.1]),
            Err(Error::Arity {
                expected: 2,
                got: 1
            })
        ));
    }
}
