//! Variational quantum classifier: ZZ feature map, trainable ansatz, basis-state readout.

mod ansatz;
mod cobyla;
mod grid;
mod model;

pub use ansatz::{build_ansatz, AnsatzKind, AnsatzSpec};
pub use cobyla::{cobyla_minimize, OptimizeResult, OptimizerConfig, OptimizerKind};
pub use grid::{grid_search, write_grid_csv, GridRow};
pub use model::{vqc_forward, vqc_loss, vqc_train, Readout, VqcModel};
