//! Dense statevector simulation of few-qubit circuits.
//!
//! Basis states are indexed little-endian: qubit 0 is the least significant
//! bit of the amplitude index, so `|q1 q0⟩ = |10⟩` lives at index 2.

mod circuit;
mod gate;
mod state;

pub use circuit::{inverse_circuit, Angle, GateTemplate, ParameterizedCircuit};
pub use gate::Gate;
pub use state::{inner_product, StateVector, MAX_QUBITS};

use crate::scalar::Real;

/// Norm tolerance used when validating states: `1e-10` for `f64`, a few ulps for `f32`.
pub(crate) fn norm_tolerance<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(64.0))
}
