use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A concrete gate from the supported set `{H, RY, RZ, PHASE, CX}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "UPPERCASE")]
pub enum Gate<T> {
    H { target: usize },
    Ry { target: usize, angle: T },
    Rz { target: usize, angle: T },
    Phase { target: usize, angle: T },
    Cx { control: usize, target: usize },
}

impl<T: Real> Gate<T> {
    pub fn target(&self) -> usize {
        match *self {
            Gate::H { target }
            | Gate::Ry { target, .. }
            | Gate::Rz { target, .. }
            | Gate::Phase { target, .. }
            | Gate::Cx { target, .. } => target,
        }
    }

    pub fn control(&self) -> Option<usize> {
        match *self {
            Gate::Cx { control, .. } => Some(control),
            _ => None,
        }
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let target = self.target();
        if target >= num_qubits {
            return Err(Error::Index {
                index: target,
                num_qubits,
            });
        }
        if let Some(control) = self.control() {
            if control >= num_qubits {
                return Err(Error::Index {
                    index: control,
                    num_qubits,
                });
            }
            if control == target {
                return Err(Error::Input(format!(
                    "CX control and target are both qubit {target}"
                )));
            }
        }
        Ok(())
    }

    /// The adjoint gate. H and CX are self-inverse; rotations negate their angle.
    pub fn inverse(&self) -> Self {
        match *self {
            Gate::Ry { target, angle } => Gate::Ry {
                target,
                angle: -angle,
            },
            Gate::Rz { target, angle } => Gate::Rz {
                target,
                angle: -angle,
            },
            Gate::Phase { target, angle } => Gate::Phase {
                target,
                angle: -angle,
            },
            g => g,
        }
    }

    /// The 2×2 matrix acting on the target qubit, `None` for CX.
    ///
    /// `RZ(θ) = diag(e^{-iθ/2}, e^{iθ/2})`, `PHASE(λ) = diag(1, e^{iλ})`.
    pub fn single_qubit_matrix(&self) -> Option<[[Complex<T>; 2]; 2]> {
        let zero = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let half = T::lit(0.5);
        match *self {
            Gate::H { .. } => {
                let s = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
                Some([[s, s], [s, -s]])
            }
            Gate::Ry { angle, .. } => {
                let (sin, cos) = (angle * half).sin_cos();
                let c = Complex::new(cos, T::zero());
                let s = Complex::new(sin, T::zero());
                Some([[c, -s], [s, c]])
            }
            Gate::Rz { angle, .. } => Some([
                [Complex::from_polar(T::one(), -angle * half), zero],
                [zero, Complex::from_polar(T::one(), angle * half)],
            ]),
            Gate::Phase { angle, .. } => {
                Some([[one, zero], [zero, Complex::from_polar(T::one(), angle)]])
            }
            Gate::Cx { .. } => None,
        }
    }

    /// Full matrix of the gate on `num_qubits` qubits (dimension `2^n`). Test and
    /// inspection helper; simulation never materialises it.
    pub fn dense_matrix(&self, num_qubits: usize) -> Result<Vec<Vec<Complex<T>>>> {
        self.validate(num_qubits)?;
        let dim = 1usize << num_qubits;
        let mut m = vec![vec![Complex::new(T::zero(), T::zero()); dim]; dim];
        for col in 0..dim {
            let mut basis = vec![Complex::new(T::zero(), T::zero()); dim];
            basis[col] = Complex::new(T::one(), T::zero());
            apply_in_place(&mut basis, self);
            for row in 0..dim {
                m[row][col] = basis[row];
            }
        }
        Ok(m)
    }
}

/// Applies a validated gate to raw amplitudes.
pub(crate) fn apply_in_place<T: Real>(amps: &mut [Complex<T>], gate: &Gate<T>) {
    match *gate {
        Gate::Cx { control, target } => {
            let cmask = 1usize << control;
            let tmask = 1usize << target;
            for i in 0..amps.len() {
                if i & cmask != 0 && i & tmask == 0 {
                    amps.swap(i, i | tmask);
                }
            }
        }
        Gate::Phase { target, angle } => {
            let tmask = 1usize << target;
            let phase = Complex::from_polar(T::one(), angle);
            for (i, a) in amps.iter_mut().enumerate() {
                if i & tmask != 0 {
                    *a *= phase;
                }
            }
        }
        _ => {
            let m = gate.single_qubit_matrix().expect("single-qubit gate");
            let tmask = 1usize << gate.target();
            for i in 0..amps.len() {
                if i & tmask == 0 {
                    let j = i | tmask;
                    let (a0, a1) = (amps[i], amps[j]);
                    amps[i] = m[0][0] * a0 + m[0][1] * a1;
                    amps[j] = m[1][0] * a0 + m[1][1] * a1;
                }
            }
        }
    }
}
