use serde::{Deserialize, Serialize};

use crate::encode::Entanglement;
use crate::error::{Error, Result};
use crate::qsim::{GateTemplate, ParameterizedCircuit};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnsatzKind {
    RealAmplitudes,
    EfficientSU2,
}

impl AnsatzKind {
    pub const ALL: [AnsatzKind; 2] = [AnsatzKind::RealAmplitudes, AnsatzKind::EfficientSU2];

    pub fn name(self) -> &'static str {
        match self {
            AnsatzKind::RealAmplitudes => "RealAmplitudes",
            AnsatzKind::EfficientSU2 => "EfficientSU2",
        }
    }

    fn rotations_per_qubit(self) -> usize {
        match self {
            AnsatzKind::RealAmplitudes => 1,
            AnsatzKind::EfficientSU2 => 2,
        }
    }
}

impl std::str::FromStr for AnsatzKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "realamplitudes" | "real_amplitudes" => Ok(AnsatzKind::RealAmplitudes),
            "efficientsu2" | "efficient_su2" => Ok(AnsatzKind::EfficientSU2),
            other => Err(Error::Config(format!("unknown ansatz {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    pub num_qubits: usize,
    pub reps: usize,
    #[serde(default)]
    pub entanglement: Entanglement,
}

impl AnsatzSpec {
    pub fn new(kind: AnsatzKind, num_qubits: usize, reps: usize, entanglement: Entanglement) -> Result<Self> {
        if num_qubits == 0 || reps == 0 {
            return Err(Error::Config(format!(
                "ansatz needs ≥1 qubit and ≥1 rep, got {num_qubits} and {reps}"
            )));
        }
        Ok(Self {
            kind,
            num_qubits,
            reps,
            entanglement,
        })
    }

    /// `n·(reps+1)` for RealAmplitudes, `2·n·(reps+1)` for EfficientSU2.
    pub fn num_parameters(&self) -> usize {
        self.kind.rotations_per_qubit() * self.num_qubits * (self.reps + 1)
    }
}

/// Rotation layer, then `reps` × (CX entangling layer + rotation layer).
///
/// EfficientSU2 rotation layers are an RY sweep followed by an RZ sweep. Slots are
/// numbered layer-major, qubit-minor.
pub fn build_ansatz<T: Real>(spec: &AnsatzSpec) -> Result<ParameterizedCircuit<T>> {
    let n = spec.num_qubits;
    let mut circuit = ParameterizedCircuit::new(n)?;
    let rotation_layer = |c: &mut ParameterizedCircuit<T>| -> Result<()> {
        for target in 0..n {
            let angle = c.next_param();
            c.push(GateTemplate::Ry { target, angle })?;
        }
        if spec.kind == AnsatzKind::EfficientSU2 {
            for target in 0..n {
                let angle = c.next_param();
                c.push(GateTemplate::Rz { target, angle })?;
            }
        }
        Ok(())
    };
    rotation_layer(&mut circuit)?;
    for _ in 0..spec.reps {
        for (control, target) in spec.entanglement.pairs(n) {
            circuit.push(GateTemplate::Cx { control, target })?;
        }
        rotation_layer(&mut circuit)?;
    }
    debug_assert_eq!(circuit.num_parameters(), spec.num_parameters());
    Ok(circuit)
}
