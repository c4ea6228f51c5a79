//! Two-layer perceptron regressor: `m → hidden (ReLU) → 1`, trained on mean
//! squared error with Adam.

use serde::{Deserialize, Serialize};

use crate::ensemble::model::{EnsembleModel, Regressor};
use crate::ensemble::{standardize_apply, standardize_fit, FeatureMatrix};
use crate::error::{Error, Result};
use crate::rng::XorShift64;

/// Smallest training set accepted by [`fit_mlp`].
pub const MIN_MLP_ROWS: usize = 10;

/// Optimizer settings. Defaults: 100 hidden units, step 1e-3, batches of
/// 32, at most 500 epochs, stop after 25 epochs without a better
/// validation MSE, 10% of rows held out for that check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub hidden: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub validation_fraction: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            hidden: 100,
            learning_rate: 1e-3,
            batch_size: 32,
            max_epochs: 500,
            patience: 25,
            validation_fraction: 0.1,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Flat parameter vector laid out as `[w1 (m×h, row-major by input) | b1 (h)
/// | w2 (h) | b2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    inputs: usize,
    hidden: usize,
    data: Vec<f64>,
}

impl MlpParams {
    pub fn zeros(inputs: usize, hidden: usize) -> Self {
        MlpParams {
            inputs,
            hidden,
            data: vec![0.0; inputs * hidden + 2 * hidden + 1],
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn glorot(inputs: usize, hidden: usize, rng: &mut XorShift64) -> Self {
        let mut p = MlpParams::zeros(inputs, hidden);
        let l1 = (6.0 / (inputs + hidden) as f64).sqrt();
        let l2 = (6.0 / (hidden + 1) as f64).sqrt();
        let (w1_end, b1_end) = (inputs * hidden, inputs * hidden + hidden);
        for v in &mut p.data[..w1_end] {
            *v = rng.uniform(-l1, l1);
        }
        for v in &mut p.data[b1_end..b1_end + hidden] {
            *v = rng.uniform(-l2, l2);
        }
        p
    }

    pub fn from_parts(w1: &[Vec<f64>], b1: &[f64], w2: &[f64], b2: f64) -> Result<Self> {
        let (inputs, hidden) = (w1.len(), b1.len());
        if w2.len() != hidden || w1.iter().any(|r| r.len() != hidden) {
            return Err(Error::invalid("inconsistent perceptron weight shapes"));
        }
        let mut data = Vec::with_capacity(inputs * hidden + 2 * hidden + 1);
        for r in w1 {
            data.extend_from_slice(r);
        }
        data.extend_from_slice(b1);
        data.extend_from_slice(w2);
        data.push(b2);
        Ok(MlpParams { inputs, hidden, data })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Layer-1 weights, one row per input.
    pub fn w1(&self) -> Vec<Vec<f64>> {
        self.data[..self.inputs * self.hidden]
            .chunks(self.hidden)
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn b1(&self) -> &[f64] {
        let s = self.inputs * self.hidden;
        &self.data[s..s + self.hidden]
    }

    pub fn w2(&self) -> &[f64] {
        let s = self.inputs * self.hidden + self.hidden;
        &self.data[s..s + self.hidden]
    }

    pub fn b2(&self) -> f64 {
        self.data[self.data.len() - 1]
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        let h = self.hidden;
        let (w1, rest) = self.data.split_at(self.inputs * h);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(h);
        let mut z = b1.to_vec();
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                for (zk, w) in z.iter_mut().zip(&w1[i * h..(i + 1) * h]) {
                    *zk += xi * w;
                }
            }
        }
        b2[0] + z.iter().zip(w2).map(|(zk, w)| zk.max(0.0) * w).sum::<f64>()
    }

    /// Mean squared error over `batch` and its gradient (same layout as the
    /// parameters).
    pub fn loss_and_grad<R: AsRef<[f64]>>(&self, batch: &[R], targets: &[f64]) -> (f64, Vec<f64>) {
        let h = self.hidden;
        let m = self.inputs;
        let mut grad = vec![0.0; self.data.len()];
        let (w1, rest) = self.data.split_at(m * h);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(h);
        let scale = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        let mut z = vec![0.0; h];
        for (x, &t) in batch.iter().zip(targets) {
            let x = x.as_ref();
            z.copy_from_slice(b1);
            for (i, &xi) in x.iter().enumerate() {
                for (zk, w) in z.iter_mut().zip(&w1[i * h..(i + 1) * h]) {
                    *zk += xi * w;
                }
            }
            let out = b2[0] + z.iter().zip(w2).map(|(zk, w)| zk.max(0.0) * w).sum::<f64>();
            let err = out - t;
            loss += err * err * scale;
            let d = 2.0 * err * scale;
            let (g_w1, g_rest) = grad.split_at_mut(m * h);
            let (g_b1, g_rest) = g_rest.split_at_mut(h);
            let (g_w2, g_b2) = g_rest.split_at_mut(h);
            g_b2[0] += d;
            for k in 0..h {
                if z[k] > 0.0 {
                    g_w2[k] += d * z[k];
                    let dz = d * w2[k];
                    g_b1[k] += dz;
                    for (i, &xi) in x.iter().enumerate() {
                        g_w1[i * h + k] += xi * dz;
                    }
                }
            }
        }
        (loss, grad)
    }

    fn mse(&self, rows: &[&[f64]], targets: &[f64]) -> f64 {
        rows.iter()
            .zip(targets)
            .map(|(x, t)| (self.forward(x) - t).powi(2))
            .sum::<f64>()
            / rows.len() as f64
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], cfg: &TrainingConfig) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            *p -= cfg.learning_rate * (*m / c1) / ((*v / c2).sqrt() + cfg.epsilon);
        }
    }
}

/// Trains the perceptron on already standardized rows. Deterministic for a
/// fixed seed; the parameters with the best held-out MSE are returned.
pub fn train_params(rows: &[&[f64]], y: &[f64], seed: u64, cfg: &TrainingConfig) -> Result<MlpParams> {
    let n = rows.len();
    if n < MIN_MLP_ROWS {
        return Err(Error::invalid(format!(
            "perceptron needs at least {MIN_MLP_ROWS} rows, got {n}; use the linear model"
        )));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: y.len() });
    }
    if cfg.batch_size == 0 || cfg.hidden == 0 {
        return Err(Error::invalid("batch size and hidden width must be positive"));
    }
    let mut rng = XorShift64::new(seed);
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let n_val = ((cfg.validation_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let (val_idx, train_idx) = order.split_at(n_val);
    let val_rows: Vec<&[f64]> = val_idx.iter().map(|&i| rows[i]).collect();
    let val_y: Vec<f64> = val_idx.iter().map(|&i| y[i]).collect();
    let mut train_idx = train_idx.to_vec();

    let mut params = MlpParams::glorot(rows[0].len(), cfg.hidden, &mut rng);
    let mut adam = Adam::new(params.data.len());
    let mut best = params.clone();
    let mut best_mse = params.mse(&val_rows, &val_y);
    let mut stale = 0;
    let mut batch_rows: Vec<&[f64]> = Vec::with_capacity(cfg.batch_size);
    let mut batch_y = Vec::with_capacity(cfg.batch_size);
    for _ in 0..cfg.max_epochs {
        rng.shuffle(&mut train_idx);
        for chunk in train_idx.chunks(cfg.batch_size) {
            batch_rows.clear();
            batch_y.clear();
            for &i in chunk {
                batch_rows.push(rows[i]);
                batch_y.push(y[i]);
            }
            let (_, grad) = params.loss_and_grad(&batch_rows, &batch_y);
            adam.step(&mut params.data, &grad, cfg);
        }
        let mse = params.mse(&val_rows, &val_y);
        if mse < best_mse {
            best_mse = mse;
            best = params.clone();
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }
    Ok(best)
}

/// Perceptron regressor on standardized features.
pub fn fit_mlp(x: &FeatureMatrix, y: &[f64], seed: u64, cfg: &TrainingConfig) -> Result<EnsembleModel> {
    if x.n_rows() < MIN_MLP_ROWS {
        return Err(Error::invalid(format!(
            "perceptron needs at least {MIN_MLP_ROWS} rows, got {}; use the linear model",
            x.n_rows()
        )));
    }
    let params = standardize_fit(x)?;
    let z = standardize_apply(x, &params)?;
    let rows: Vec<&[f64]> = z.rows().collect();
    let mlp = train_params(&rows, y, seed, cfg)?;
    Ok(EnsembleModel::new(Regressor::from_mlp(&mlp), params, x.names().to_vec(), seed))
}
