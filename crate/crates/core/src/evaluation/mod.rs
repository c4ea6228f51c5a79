//! Rank correlation, metric-correlation matrices, the ablation driver and
//! the monolingual / cross-lingual evaluation pipelines.

mod pipeline;

use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;

use crate::ensemble::{predict, select_model, FeatureMatrix, TrainingConfig};
use crate::error::{Error, Result};
use crate::report::fixed6;

pub use pipeline::{
    ablate, cross_lingual_eval, evaluate, prepare, Evaluation, PipelineConfig, PreparedData, ScoringInput,
    SplitData, REG_BASE_PREFIX,
};

/// 1-based ranks, tied values sharing the average of their positions.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            out[i] = avg;
        }
        start = end;
    }
    out
}

fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    match (saa == 0.0, sbb == 0.0) {
        (true, true) => Err(Error::invalid("correlation of two constant vectors is undefined")),
        (true, false) | (false, true) => Ok(0.0),
        (false, false) => Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)),
    }
}

/// Spearman's rank correlation: Pearson correlation of average-tie ranks.
///
/// One constant input gives 0; two constant inputs are an error.
///
/// ```
/// use regemt::evaluation::spearman;
/// assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 25.0]).unwrap(), 1.0);
/// assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
/// ```
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::invalid("spearman needs at least 2 observations"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::invalid("spearman inputs must be finite"));
    }
    pearson(&ranks(a), &ranks(b))
}

/// Pairwise Spearman matrix of every column, diagonal 1.
fn pairwise(x: &FeatureMatrix) -> Result<Vec<Vec<f64>>> {
    let m = x.n_cols();
    let ranked: Vec<Vec<f64>> = (0..m).map(|j| ranks(&x.column(j))).collect();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let values = pairs
        .par_iter()
        .map(|&(i, j)| pearson(&ranked[i], &ranked[j]))
        .collect::<Result<Vec<f64>>>()?;
    let mut out = vec![vec![1.0; m]; m];
    for (&(i, j), v) in pairs.iter().zip(values) {
        out[i][j] = v;
        out[j][i] = v;
    }
    Ok(out)
}

/// Pairwise correlations of the metrics plus each metric's correlation to gold.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub names: Vec<String>,
    /// symmetric, unit diagonal, indexed like `names`
    pub matrix: Vec<Vec<f64>>,
    pub to_gold: Vec<f64>,
}

impl CorrelationReport {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        Some(self.matrix[i][j])
    }

    pub fn gold(&self, name: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == name)?;
        Some(self.to_gold[i])
    }

    /// Square matrix with a leading `metric` column and a trailing `gold` column.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "metric")?;
        for n in &self.names {
            write!(out, "\t{n}")?;
        }
        writeln!(out, "\tgold")?;
        for ((n, row), g) in self.names.iter().zip(&self.matrix).zip(&self.to_gold) {
            write!(out, "{n}")?;
            for v in row {
                write!(out, "\t{}", fixed6(*v))?;
            }
            writeln!(out, "\t{}", fixed6(*g))?;
        }
        Ok(())
    }
}

pub fn correlation_report(features: &FeatureMatrix, gold: &[f64]) -> Result<CorrelationReport> {
    if gold.len() != features.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: features.n_rows(),
            found: gold.len(),
        });
    }
    let matrix = pairwise(features)?;
    let to_gold = (0..features.n_cols())
        .map(|j| spearman(&features.column(j), gold))
        .collect::<Result<Vec<f64>>>()?;
    Ok(CorrelationReport {
        names: features.names().to_vec(),
        matrix,
        to_gold,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationStep {
    pub step: usize,
    /// `None` for the full-set record at step 0
    pub eliminated: Option<String>,
    pub remaining: usize,
    pub test_rho: f64,
}

/// Test correlation of the refit ensemble as features are removed one by one.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationCurve {
    pub steps: Vec<AblationStep>,
}

impl AblationCurve {
    /// Eliminated features in order.
    pub fn order(&self) -> Vec<&str> {
        self.steps.iter().filter_map(|s| s.eliminated.as_deref()).collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "step,eliminated,remaining,test_rho")?;
        for s in &self.steps {
            writeln!(
                out,
                "{},{},{},{}",
                s.step,
                s.eliminated.as_deref().unwrap_or(""),
                s.remaining,
                fixed6(s.test_rho)
            )?;
        }
        Ok(())
    }
}

/// Index of the feature with the largest absolute correlation to any other
/// feature; ties go to the lexicographically smaller name.
fn most_redundant(names: &[String], matrix: &[Vec<f64>]) -> usize {
    let score = |i: usize| {
        (0..names.len())
            .filter(|&j| j != i)
            .map(|j| matrix[i][j].abs())
            .fold(0.0, f64::max)
    };
    (0..names.len())
        .map(|i| (i, score(i)))
        .max_by(|&(i, a), &(j, b)| {
            a.partial_cmp(&b)
                .unwrap_or(Ordering::Equal)
                .then_with(|| names[j].cmp(&names[i]))
        })
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Correlation-driven elimination. Records the full ensemble at step 0, then
/// repeatedly drops the feature most correlated (in absolute value, on the
/// train rows) with any other, refits with [`select_model`] and records the
/// test correlation, until one feature is left.
#[allow(clippy::too_many_arguments)]
pub fn ablation<G: AsRef<str>>(
    train: &FeatureMatrix,
    test: &FeatureMatrix,
    gold_train: &[f64],
    gold_test: &[f64],
    groups_train: &[G],
    seed: u64,
    cfg: &TrainingConfig,
) -> Result<AblationCurve> {
    if train.n_cols() < 2 {
        return Err(Error::invalid("ablation needs at least 2 features"));
    }
    if train.names() != test.names() {
        return Err(Error::FeatureMismatch {
            expected: train.names().to_vec(),
            found: test.names().to_vec(),
        });
    }
    let test_rho = |names: &[String]| -> Result<f64> {
        let tr = train.select_columns(names)?;
        let te = test.select_columns(names)?;
        let model = select_model(&tr, gold_train, groups_train, seed, cfg)?;
        spearman(&predict(&model, &te)?, gold_test)
    };

    let mut remaining: Vec<String> = train.names().to_vec();
    let mut steps = vec![AblationStep {
        step: 0,
        eliminated: None,
        remaining: remaining.len(),
        test_rho: test_rho(&remaining)?,
    }];
    while remaining.len() > 1 {
        let matrix = pairwise(&train.select_columns(&remaining)?)?;
        let victim = remaining.remove(most_redundant(&remaining, &matrix));
        log::info!("ablation step {}: eliminated {victim}", steps.len());
        steps.push(AblationStep {
            step: steps.len(),
            eliminated: Some(victim),
            remaining: remaining.len(),
            test_rho: test_rho(&remaining)?,
        });
    }
    Ok(AblationCurve { steps })
}
