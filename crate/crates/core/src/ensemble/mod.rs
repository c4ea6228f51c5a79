//! Regressors that ensemble metric scores into a single quality estimate.
//!
//! Features are z-scored with train-set statistics, then fitted by either
//! least squares or a one-hidden-layer ReLU perceptron. [`select_model`]
//! picks between the two on a source-disjoint validation split.

mod features;
pub mod linear;
pub mod mlp;
mod model;
mod standardize;

pub use features::FeatureMatrix;
pub use linear::{fit_linear, least_squares};
pub use mlp::{fit_mlp, MlpParams, TrainingConfig};
pub use model::{predict, select_model, EnsembleModel, ModelKind, Regressor, Selection, MODEL_FORMAT_VERSION};
pub use standardize::{standardize_apply, standardize_fit, StandardizationParams};
