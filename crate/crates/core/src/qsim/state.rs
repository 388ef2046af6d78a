use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::circuit::ParameterizedCircuit;
use super::gate::{apply_in_place, Gate};
use super::norm_tolerance;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Upper bound for dense simulation.
pub const MAX_QUBITS: usize = 20;

/// Normalised amplitude vector over the `2^n` computational basis states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector<T> {
    num_qubits: usize,
    amplitudes: Vec<Complex<T>>,
}

fn check_qubits(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::Size(format!(
            "{num_qubits} qubits outside the supported range 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

impl<T: Real> StateVector<T> {
    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn zero_state(num_qubits: usize) -> Result<Self> {
        Self::basis_state(num_qubits, 0)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::Size(format!(
                "basis index {index} outside a {dim}-dimensional space"
            )));
        }
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); dim];
        amplitudes[index] = Complex::new(T::one(), T::zero());
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Wraps explicit amplitudes, checking length and normalisation.
    pub fn from_amplitudes(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Size(format!(
                "{dim} amplitudes is not a power of two ≥ 2"
            )));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        check_qubits(num_qubits)?;
        let state = Self {
            num_qubits,
            amplitudes,
        };
        let deviation = (state.norm_sqr() - T::one()).abs();
        if !(deviation <= norm_tolerance::<T>()) {
            return Err(Error::Domain(format!(
                "amplitudes are not normalised (|Σ|a|² − 1| = {deviation})"
            )));
        }
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Returns the state after applying `gate`.
    pub fn apply_gate(&self, gate: &Gate<T>) -> Result<Self> {
        let mut out = self.clone();
        out.apply_gate_mut(gate)?;
        Ok(out)
    }

    pub(crate) fn apply_gate_mut(&mut self, gate: &Gate<T>) -> Result<()> {
        gate.validate(self.num_qubits)?;
        apply_in_place(&mut self.amplitudes, gate);
        Ok(())
    }

    /// Binds `params` into `circuit` and applies its gates in order.
    pub fn apply_circuit(&self, circuit: &ParameterizedCircuit<T>, params: &[T]) -> Result<Self> {
        let mut out = self.clone();
        out.apply_circuit_mut(circuit, params)?;
        Ok(out)
    }

    pub(crate) fn apply_circuit_mut(
        &mut self,
        circuit: &ParameterizedCircuit<T>,
        params: &[T],
    ) -> Result<()> {
        if circuit.num_qubits() != self.num_qubits {
            return Err(Error::Dimension(format!(
                "circuit on {} qubits applied to a {}-qubit state",
                circuit.num_qubits(),
                self.num_qubits
            )));
        }
        if params.len() != circuit.num_parameters() {
            return Err(Error::Arity {
                expected: circuit.num_parameters(),
                got: params.len(),
            });
        }
        // Gate indices were validated when the circuit was built.
        for template in circuit.gates() {
            apply_in_place(&mut self.amplitudes, &template.bind(params));
        }
        Ok(())
    }

    /// Measurement distribution `p_i = |a_i|²`.
    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// `⟨a|b⟩ = Σ conj(a_i)·b_i`.
pub fn inner_product<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> Result<Complex<T>> {
    if a.num_qubits != b.num_qubits {
        return Err(Error::Dimension(format!(
            "inner product of {}-qubit and {}-qubit states",
            a.num_qubits, b.num_qubits
        )));
    }
    Ok(a
        .amplitudes
        .iter()
        .zip(&b.amplitudes)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| {
            acc + x.conj() * y
        }))
}
