use serde::{Deserialize, Serialize};

use super::gate::Gate;
use super::state::MAX_QUBITS;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// A rotation angle: either fixed or read from a parameter slot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Angle<T> {
    Const(T),
    Param(usize),
}

impl<T: Real> Angle<T> {
    fn resolve(&self, params: &[T]) -> T {
        match *self {
            Angle::Const(v) => v,
            Angle::Param(i) => params[i],
        }
    }
}

/// Gate whose angle may reference a parameter slot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "UPPERCASE")]
pub enum GateTemplate<T> {
    H { target: usize },
    Ry { target: usize, angle: Angle<T> },
    Rz { target: usize, angle: Angle<T> },
    Phase { target: usize, angle: Angle<T> },
    Cx { control: usize, target: usize },
}

impl<T: Real> GateTemplate<T> {
    pub fn bind(&self, params: &[T]) -> Gate<T> {
        match *self {
            GateTemplate::H { target } => Gate::H { target },
            GateTemplate::Ry { target, angle } => Gate::Ry {
                target,
                angle: angle.resolve(params),
            },
            GateTemplate::Rz { target, angle } => Gate::Rz {
                target,
                angle: angle.resolve(params),
            },
            GateTemplate::Phase { target, angle } => Gate::Phase {
                target,
                angle: angle.resolve(params),
            },
            GateTemplate::Cx { control, target } => Gate::Cx { control, target },
        }
    }

    /// The gate with every angle zeroed; used to validate qubit indices.
    fn shape(&self) -> Gate<T> {
        let zeros = [T::zero()];
        let flat = |a: Angle<T>| match a {
            Angle::Const(v) => Angle::Const(v),
            Angle::Param(_) => Angle::Param(0),
        };
        match *self {
            GateTemplate::Ry { target, angle } => GateTemplate::Ry { target, angle: flat(angle) },
            GateTemplate::Rz { target, angle } => GateTemplate::Rz { target, angle: flat(angle) },
            GateTemplate::Phase { target, angle } => GateTemplate::Phase { target, angle: flat(angle) },
            g => g,
        }
        .bind(&zeros)
    }

    fn angle(&self) -> Option<Angle<T>> {
        match *self {
            GateTemplate::Ry { angle, .. }
            | GateTemplate::Rz { angle, .. }
            | GateTemplate::Phase { angle, .. } => Some(angle),
            _ => None,
        }
    }

    fn shift_slots(self, offset: usize) -> Self {
        let shift = |a: Angle<T>| match a {
            Angle::Param(i) => Angle::Param(i + offset),
            c => c,
        };
        match self {
            GateTemplate::Ry { target, angle } => GateTemplate::Ry {
                target,
                angle: shift(angle),
            },
            GateTemplate::Rz { target, angle } => GateTemplate::Rz {
                target,
                angle: shift(angle),
            },
            GateTemplate::Phase { target, angle } => GateTemplate::Phase {
                target,
                angle: shift(angle),
            },
            g => g,
        }
    }
}

impl<T: Real> From<Gate<T>> for GateTemplate<T> {
    fn from(g: Gate<T>) -> Self {
        match g {
            Gate::H { target } => GateTemplate::H { target },
            Gate::Ry { target, angle } => GateTemplate::Ry {
                target,
                angle: Angle::Const(angle),
            },
            Gate::Rz { target, angle } => GateTemplate::Rz {
                target,
                angle: Angle::Const(angle),
            },
            Gate::Phase { target, angle } => GateTemplate::Phase {
                target,
                angle: Angle::Const(angle),
            },
            Gate::Cx { control, target } => GateTemplate::Cx { control, target },
        }
    }
}

/// Ordered gate list with densely indexed parameter slots `0..num_parameters`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterizedCircuit<T> {
    num_qubits: usize,
    gates: Vec<GateTemplate<T>>,
    num_parameters: usize,
}

impl<T: Real> ParameterizedCircuit<T> {
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::Size(format!(
                "{num_qubits} qubits outside the supported range 1..={MAX_QUBITS}"
            )));
        }
        Ok(Self {
            num_qubits,
            gates: Vec::new(),
            num_parameters: 0,
        })
    }

    /// A fully bound circuit from concrete gates.
    pub fn from_gates(num_qubits: usize, gates: impl IntoIterator<Item = Gate<T>>) -> Result<Self> {
        let mut circuit = Self::new(num_qubits)?;
        for g in gates {
            circuit.push(g.into())?;
        }
        Ok(circuit)
    }

    /// Appends a gate. A `Param(i)` with `i == num_parameters` opens a new slot;
    /// larger indices would leave a hole and are rejected.
    pub fn push(&mut self, template: GateTemplate<T>) -> Result<&mut Self> {
        template.shape().validate(self.num_qubits)?;
        if let Some(Angle::Param(i)) = template.angle() {
            if i > self.num_parameters {
                return Err(Error::Input(format!(
                    "parameter slot {i} would leave slots {}..{i} unused",
                    self.num_parameters
                )));
            }
            if i == self.num_parameters {
                self.num_parameters += 1;
            }
        }
        self.gates.push(template);
        Ok(self)
    }

    /// Appends a fresh parameter slot and returns it.
    pub fn next_param(&self) -> Angle<T> {
        Angle::Param(self.num_parameters)
    }

    /// Appends `other` after `self`; its parameter slots are renumbered after ours.
    pub fn compose(&mut self, other: &ParameterizedCircuit<T>) -> Result<&mut Self> {
        if other.num_qubits != self.num_qubits {
            return Err(Error::Dimension(format!(
                "cannot compose a {}-qubit circuit onto {} qubits",
                other.num_qubits, self.num_qubits
            )));
        }
        let offset = self.num_parameters;
        self.gates
            .extend(other.gates.iter().map(|g| g.shift_slots(offset)));
        self.num_parameters += other.num_parameters;
        Ok(self)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_parameters(&self) -> usize {
        self.num_parameters
    }

    pub fn gates(&self) -> &[GateTemplate<T>] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn is_bound(&self) -> bool {
        self.num_parameters == 0
    }

    /// Substitutes every parameter slot, producing a circuit with no free slots.
    pub fn bind(&self, params: &[T]) -> Result<Self> {
        if params.len() != self.num_parameters {
            return Err(Error::Arity {
                expected: self.num_parameters,
                got: params.len(),
            });
        }
        Ok(Self {
            num_qubits: self.num_qubits,
            gates: self
                .gates
                .iter()
                .map(|g| g.bind(params).into())
                .collect(),
            num_parameters: 0,
        })
    }

    /// Concrete gates of a bound circuit.
    pub fn concrete_gates(&self) -> Result<Vec<Gate<T>>> {
        if !self.is_bound() {
            return Err(Error::Unbound(self.num_parameters));
        }
        Ok(self.gates.iter().map(|g| g.bind(&[])).collect())
    }
}

/// `U†` of a bound circuit: gates reversed, rotation and phase angles negated.
pub fn inverse_circuit<T: Real>(circuit: &ParameterizedCircuit<T>) -> Result<ParameterizedCircuit<T>> {
    let gates = circuit.concrete_gates()?;
    ParameterizedCircuit::from_gates(circuit.num_qubits, gates.iter().rev().map(Gate::inverse))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::StateVector;
    use num_complex::Complex;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn empty_circuit_is_identity() {
        let s = StateVector::<f64>::zero_state(2)
            .unwrap()
            .apply_gate(&Gate::H { target: 1 })
            .unwrap();
        let c = ParameterizedCircuit::new(2).unwrap();
        assert_eq!(s.apply_circuit(&c, &[]).unwrap(), s);
    }

    #[test]
    fn double_hadamard_returns_zero() {
        let c = ParameterizedCircuit::from_gates(1, [Gate::H { target: 0 }, Gate::H { target: 0 }])
            .unwrap();
        let s = StateVector::<f64>::zero_state(1).unwrap().apply_circuit(&c, &[]).unwrap();
        assert!((s.amplitudes()[0] - Complex::new(1.0, 0.0)).norm() < 1e-12);
        assert!(s.amplitudes()[1].norm() < 1e-12);
    }

    #[test]
    fn bell_circuit_matches_hand_product() {
        // (CX ⊗) · (I ⊗ H) |00⟩ with little-endian ordering: H on q0 gives
        // (|0⟩+|1⟩)/√2 at indices 0 and 1; CX(0→1) moves index 1 to 3.
        let c = ParameterizedCircuit::from_gates(
            2,
            [
                Gate::H { target: 0 },
                Gate::Cx {
                    control: 0,
                    target: 1,
                },
            ],
        )
        .unwrap();
        let s = StateVector::<f64>::zero_state(2).unwrap().apply_circuit(&c, &[]).unwrap();
        let expected = [FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2];
        for (a, e) in s.amplitudes().iter().zip(expected) {
            assert!((a - Complex::new(e, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn arity_is_checked() {
        let mut c = ParameterizedCircuit::<f64>::new(1).unwrap();
        let slot = c.next_param();
        c.push(GateTemplate::Ry { target: 0, angle: slot }).unwrap();
        let s = StateVector::zero_state(1).unwrap();
        assert!(matches!(
            s.apply_circuit(&c, &[]),
            Err(Error::Arity {
                expected: 1,
                got: 0
            })
        ));
        assert!(c.bind(&[0.1, 0.2]).is_err());
    }

    #[test]
    fn sparse_parameter_slots_are_rejected() {
        let mut c = ParameterizedCircuit::<f64>::new(1).unwrap();
        assert!(c
            .push(GateTemplate::Ry {
                target: 0,
                angle: Angle::Param(1)
            })
            .is_err());
    }

    #[test]
    fn binding_leaves_no_free_slots() {
        let mut c = ParameterizedCircuit::<f64>::new(2).unwrap();
        for q in 0..2 {
            let slot = c.next_param();
            c.push(GateTemplate::Ry { target: q, angle: slot }).unwrap();
        }
        // Reusing a slot does not open a new one.
        c.push(GateTemplate::Rz {
            target: 0,
            angle: Angle::Param(0),
        })
        .unwrap();
        assert_eq!(c.num_parameters(), 2);
        let bound = c.bind(&[0.4, -0.2]).unwrap();
        assert!(bound.is_bound());
        assert_eq!(
            bound.concrete_gates().unwrap()[2],
            Gate::Rz {
                target: 0,
                angle: 0.4
            }
        );
    }

    #[test]
    fn inverse_reverses_and_negates() {
        let c = ParameterizedCircuit::from_gates(
            2,
            [
                Gate::Rz {
                    target: 0,
                    angle: 0.3,
                },
                Gate::Cx {
                    control: 0,
                    target: 1,
                },
            ],
        )
        .unwrap();
        let inv = inverse_circuit(&c).unwrap();
        assert_eq!(
            inv.concrete_gates().unwrap(),
            vec![
                Gate::Cx {
                    control: 0,
                    target: 1
                },
                Gate::Rz {
                    target: 0,
                    angle: -0.3
                },
            ]
        );
        let h = ParameterizedCircuit::from_gates(1, [Gate::<f64>::H { target: 0 }]).unwrap();
        assert_eq!(inverse_circuit(&h).unwrap(), h);
    }

    #[test]
    fn inverse_requires_bound_circuit() {
        let mut c = ParameterizedCircuit::<f64>::new(1).unwrap();
        let slot = c.next_param();
        c.push(GateTemplate::Phase { target: 0, angle: slot }).unwrap();
        assert!(matches!(inverse_circuit(&c), Err(Error::Unbound(1))));
    }

    #[test]
    fn compose_renumbers_slots() {
        let mut a = ParameterizedCircuit::<f64>::new(1).unwrap();
        let s = a.next_param();
        a.push(GateTemplate::Ry { target: 0, angle: s }).unwrap();
        let b = a.clone();
        a.compose(&b).unwrap();
        assert_eq!(a.num_parameters(), 2);
        assert_eq!(
            a.gates()[1],
            GateTemplate::Ry {
                target: 0,
                angle: Angle::Param(1)
            }
        );
    }
}
