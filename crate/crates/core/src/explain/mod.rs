//! Model-agnostic feature importance and explanations.
//!
//! All explainers treat the model as read-only and never mutate their inputs.

mod ale;
mod loo;
mod permutation;
mod shap;

pub use ale::{ale_curve, ale_curves, ale_importance, AleCurve};
pub use loo::{drop_column, loo_importance, LooEntry, LooReport};
pub use permutation::{
    derive_seed, permutation_importance, permutation_importance_with, FeaturePermutation,
    PermutationReport,
};
pub use shap::{select_background, shap_exact, shap_global, ShapExplanation, ShapGlobal, MAX_SHAP_FEATURES};
