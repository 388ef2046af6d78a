//! Classical and simulated-quantum classifiers with model-agnostic feature
//! importance and explainability.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the bottom of this file fix the double-precision types the pipeline uses.

pub mod cml;
pub mod encode;
pub mod error;
pub mod explain;
pub mod pipeline;
pub mod qkernel;
pub mod qsim;
pub mod scalar;
pub mod vqc;

pub use error::{Error, Result};
pub use scalar::Real;

pub type StateVector64 = qsim::StateVector<f64>;
pub type Circuit64 = qsim::ParameterizedCircuit<f64>;
pub type KernelMatrix64 = qkernel::KernelMatrix<f64>;
pub type SvmClassifier64 = cml::SvmClassifier<f64>;
pub type RandomForest64 = cml::RandomForest<f64>;
pub type VqcModel64 = vqc::VqcModel<f64>;
