//! Ordinary least squares through damped normal equations.

use nalgebra::{DMatrix, DVector};

use crate::ensemble::model::{EnsembleModel, Regressor};
use crate::ensemble::{standardize_apply, standardize_fit, FeatureMatrix};
use crate::error::{Error, Result};

/// Ridge damping added to the normal equations so rank-deficient designs
/// still have a unique solution.
pub const RIDGE: f64 = 1e-8;

/// Minimizes `‖Xw + b − y‖²`; returns `(w, b)`.
pub fn least_squares<R: AsRef<[f64]>>(rows: &[R], y: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::invalid(format!("least squares needs at least 2 rows, got {n}")));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: y.len() });
    }
    let m = rows[0].as_ref().len();
    let p = m + 1;
    // Gram matrix of [X | 1]
    let mut gram = DMatrix::<f64>::zeros(p, p);
    let mut rhs = DVector::<f64>::zeros(p);
    let mut aug = vec![0.0; p];
    for (r, &t) in rows.iter().zip(y) {
        let r = r.as_ref();
        if r.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: r.len() });
        }
        aug[..m].copy_from_slice(r);
        aug[m] = 1.0;
        for a in 0..p {
            rhs[a] += aug[a] * t;
            for b in a..p {
                gram[(a, b)] += aug[a] * aug[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)];
        }
        gram[(a, a)] += RIDGE;
    }
    let solution = match gram.clone().cholesky() {
        Some(c) => c.solve(&rhs),
        None => gram
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::invalid("singular least-squares system"))?,
    };
    let w = solution.rows(0, m).iter().copied().collect();
    Ok((w, solution[m]))
}

/// Linear regressor on standardized features.
pub fn fit_linear(x: &FeatureMatrix, y: &[f64], seed: u64) -> Result<EnsembleModel> {
    let params = standardize_fit(x)?;
    let z = standardize_apply(x, &params)?;
    let rows: Vec<&[f64]> = z.rows().collect();
    let (weights, intercept) = least_squares(&rows, y)?;
    Ok(EnsembleModel::new(
        Regressor::Linear { weights, intercept },
        params,
        x.names().to_vec(),
        seed,
    ))
}
