use serde::{Deserialize, Serialize};

use crate::ensemble::FeatureMatrix;
use crate::error::{Error, Result};

/// Per-feature z-score parameters. `std` is the population standard
/// deviation, replaced by 1 for constant features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub fn standardize_fit(x: &FeatureMatrix) -> Result<StandardizationParams> {
    let n = x.n_rows();
    if n < 2 {
        return Err(Error::invalid(format!("standardization needs at least 2 rows, got {n}")));
    }
    let m = x.n_cols();
    let mut mean = vec![0.0; m];
    for r in x.rows() {
        for (s, v) in mean.iter_mut().zip(r) {
            *s += v;
        }
    }
    mean.iter_mut().for_each(|s| *s /= n as f64);
    let mut var = vec![0.0; m];
    for r in x.rows() {
        for j in 0..m {
            let d = r[j] - mean[j];
            var[j] += d * d;
        }
    }
    let std = var
        .into_iter()
        .map(|v| {
            let s = (v / n as f64).sqrt();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    Ok(StandardizationParams { mean, std })
}

fn check(x: &FeatureMatrix, p: &StandardizationParams) -> Result<()> {
    if x.n_cols() != p.mean.len() || p.std.len() != p.mean.len() {
        return Err(Error::DimensionMismatch {
            expected: p.mean.len(),
            found: x.n_cols(),
        });
    }
    Ok(())
}

/// `(x − mean) / std` per cell.
pub fn standardize_apply(x: &FeatureMatrix, p: &StandardizationParams) -> Result<FeatureMatrix> {
    check(x, p)?;
    Ok(x.map_rows(|r| p.apply_row(r)))
}

impl StandardizationParams {
    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    /// Inverse transform.
    pub fn invert(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        check(x, self)?;
        Ok(x.map_rows(|r| {
            r.iter()
                .zip(self.mean.iter().zip(&self.std))
                .map(|(v, (m, s))| v * s + m)
                .collect()
        }))
    }
}
