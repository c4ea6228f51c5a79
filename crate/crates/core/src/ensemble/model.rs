use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::split_groups;
use crate::ensemble::mlp::{MlpParams, TrainingConfig, MIN_MLP_ROWS};
use crate::ensemble::{fit_linear, fit_mlp, FeatureMatrix, StandardizationParams};
use crate::error::{Error, Result};
use crate::evaluation::spearman;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Validation Spearman differences below this count as a tie, which goes
/// to the linear model.
pub const SELECTION_TIE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Linear,
    Mlp,
}

/// Fitted weights of either regressor family. Operates on standardized rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Regressor {
    Linear {
        weights: Vec<f64>,
        intercept: f64,
    },
    Mlp {
        /// one row per input feature, one column per hidden unit
        hidden_weights: Vec<Vec<f64>>,
        hidden_bias: Vec<f64>,
        output_weights: Vec<f64>,
        output_bias: f64,
    },
}

impl Regressor {
    pub(crate) fn from_mlp(p: &MlpParams) -> Regressor {
        Regressor::Mlp {
            hidden_weights: p.w1(),
            hidden_bias: p.b1().to_vec(),
            output_weights: p.w2().to_vec(),
            output_bias: p.b2(),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Regressor::Linear { .. } => ModelKind::Linear,
            Regressor::Mlp { .. } => ModelKind::Mlp,
        }
    }

    fn inputs(&self) -> usize {
        match self {
            Regressor::Linear { weights, .. } => weights.len(),
            Regressor::Mlp { hidden_weights, .. } => hidden_weights.len(),
        }
    }

    /// Output for one standardized row.
    pub fn forward(&self, row: &[f64]) -> f64 {
        match self {
            Regressor::Linear { weights, intercept } => {
                intercept + row.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>()
            }
            Regressor::Mlp {
                hidden_weights,
                hidden_bias,
                output_weights,
                output_bias,
            } => {
                let mut z = hidden_bias.clone();
                for (x, w) in row.iter().zip(hidden_weights) {
                    for (zk, wk) in z.iter_mut().zip(w) {
                        *zk += x * wk;
                    }
                }
                output_bias + z.iter().zip(output_weights).map(|(zk, w)| zk.max(0.0) * w).sum::<f64>()
            }
        }
    }
}

/// Validation outcome recorded by [`select_model`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub linear_rho: f64,
    pub mlp_rho: Option<f64>,
}

/// A fitted ensemble: regressor, its standardization and the exact feature
/// list it was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub version: u32,
    #[serde(flatten)]
    pub regressor: Regressor,
    pub standardization: StandardizationParams,
    pub feature_names: Vec<String>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<Selection>,
}

impl EnsembleModel {
    pub fn new(regressor: Regressor, standardization: StandardizationParams, feature_names: Vec<String>, seed: u64) -> Self {
        EnsembleModel {
            version: MODEL_FORMAT_VERSION,
            regressor,
            standardization,
            feature_names,
            seed,
            selection: None,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.regressor.kind()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: EnsembleModel = serde_json::from_str(text)?;
        if model.version != MODEL_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                model.version
            )));
        }
        let m = model.feature_names.len();
        if model.regressor.inputs() != m
            || model.standardization.mean.len() != m
            || model.standardization.std.len() != m
        {
            return Err(Error::invalid("model weights do not match its feature list"));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        EnsembleModel::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Scores every row. Feature names and their order must match the model.
pub fn predict(model: &EnsembleModel, x: &FeatureMatrix) -> Result<Vec<f64>> {
    if x.names() != model.feature_names.as_slice() {
        return Err(Error::FeatureMismatch {
            expected: model.feature_names.clone(),
            found: x.names().to_vec(),
        });
    }
    Ok(x
        .rows()
        .map(|r| model.regressor.forward(&model.standardization.apply_row(r)))
        .collect())
}

/// Fits both regressors on 80% of `x` (split by `groups`, seed `seed + 1`),
/// keeps whichever has the higher validation Spearman (ties → linear) and
/// refits it on all of `x`.
///
/// If the 80% part has fewer than 10 rows only the linear model is tried.
pub fn select_model<G: AsRef<str>>(
    x: &FeatureMatrix,
    y: &[f64],
    groups: &[G],
    seed: u64,
    cfg: &TrainingConfig,
) -> Result<EnsembleModel> {
    if x.n_rows() == 0 {
        return Err(Error::invalid("cannot select a model on an empty train set"));
    }
    if y.len() != x.n_rows() || groups.len() != x.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: x.n_rows(),
            found: y.len().min(groups.len()),
        });
    }
    let (fit_rows, val_rows) = split_groups(groups, 0.8, seed.wrapping_add(1))?;
    let x_fit = x.select_rows(&fit_rows);
    let y_fit: Vec<f64> = fit_rows.iter().map(|&i| y[i]).collect();
    let x_val = x.select_rows(&val_rows);
    let y_val: Vec<f64> = val_rows.iter().map(|&i| y[i]).collect();

    let rho = |model: &EnsembleModel| -> Result<f64> {
        let pred = predict(model, &x_val)?;
        Ok(spearman(&pred, &y_val).unwrap_or_else(|e| {
            log::debug!("validation spearman undefined ({e}); counting as 0");
            0.0
        }))
    };
    let linear_rho = rho(&fit_linear(&x_fit, &y_fit, seed)?)?;
    let mlp_rho = if x_fit.n_rows() >= MIN_MLP_ROWS {
        Some(rho(&fit_mlp(&x_fit, &y_fit, seed, cfg)?)?)
    } else {
        None
    };
    let use_mlp = matches!(mlp_rho, Some(r) if r - linear_rho >= SELECTION_TIE);
    log::debug!("validation rho: linear {linear_rho:.6}, mlp {mlp_rho:?}");

    let mut model = if use_mlp {
        fit_mlp(x, y, seed, cfg)?
    } else {
        fit_linear(x, y, seed)?
    };
    model.selection = Some(Selection { linear_rho, mlp_rho });
    Ok(model)
}
