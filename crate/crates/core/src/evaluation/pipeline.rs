use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{split_groups, Dataset};
use crate::ensemble::{predict, select_model, EnsembleModel, FeatureMatrix, TrainingConfig};
use crate::error::{Error, Result};
use crate::evaluation::{ablation, correlation_report, spearman, AblationCurve, CorrelationReport};
use crate::metrics::{ExternalScores, Metric, MetricConfig, Resources, ScoreTable, Scorer};
use crate::report::fixed6;

/// Column prefix of the surface-length features.
pub const REG_BASE_PREFIX: &str = "Reg-base:";

/// A dataset together with the resources and external scores it is scored with.
#[derive(Debug, Clone, Copy)]
pub struct ScoringInput<'a> {
    pub dataset: &'a Dataset,
    pub resources: &'a Resources,
    pub external: Option<&'a ExternalScores>,
}

impl<'a> ScoringInput<'a> {
    pub fn new(dataset: &'a Dataset, resources: &'a Resources) -> Self {
        ScoringInput {
            dataset,
            resources,
            external: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub metrics: MetricConfig,
    pub train_ratio: f64,
    pub seed: u64,
    pub training: TrainingConfig,
}

impl PipelineConfig {
    pub fn new(metrics: MetricConfig, seed: u64) -> Self {
        PipelineConfig {
            metrics,
            train_ratio: 0.8,
            seed,
            training: TrainingConfig::default(),
        }
    }
}

/// Rows of one split side.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitData {
    pub x: FeatureMatrix,
    pub gold: Vec<f64>,
    /// source text of each row
    pub groups: Vec<String>,
}

/// Raw scores of a whole dataset plus its source-disjoint split.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub table: ScoreTable,
    pub gold: Vec<f64>,
    pub sources: Vec<String>,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

impl PreparedData {
    /// Worst train-split value of every column.
    pub fn placeholders(&self) -> Vec<f64> {
        self.table.placeholders(&self.train_rows)
    }

    /// (train, test) with unscorable cells filled from `placeholders`.
    pub fn split(&self, placeholders: &[f64]) -> Result<(SplitData, SplitData)> {
        let full = self.table.fill(placeholders)?;
        let side = |rows: &[usize]| SplitData {
            x: full.select_rows(rows),
            gold: rows.iter().map(|&i| self.gold[i]).collect(),
            groups: rows.iter().map(|&i| self.sources[i].clone()).collect(),
        };
        Ok((side(&self.train_rows), side(&self.test_rows)))
    }
}

/// Scores `input` (joining any external columns), computes gold scores and
/// splits rows by source text.
pub fn prepare(input: &ScoringInput<'_>, metrics: &MetricConfig, train_ratio: f64, seed: u64) -> Result<PreparedData> {
    let scorer = Scorer::new(input.dataset, metrics, input.resources)?;
    let mut table = scorer.score_all(input.dataset)?;
    if let Some(ext) = input.external {
        table.join(ext)?;
    }
    let gold = input.dataset.gold()?;
    let sources: Vec<String> = input.dataset.segments.iter().map(|s| s.source.clone()).collect();
    let (train_rows, test_rows) = split_groups(&sources, train_ratio, seed)?;
    if test_rows.len() < 2 || train_rows.len() < 2 {
        return Err(Error::invalid(format!(
            "split of `{}` leaves {} train and {} test rows",
            input.dataset.name,
            train_rows.len(),
            test_rows.len()
        )));
    }
    Ok(PreparedData {
        table,
        gold,
        sources,
        train_rows,
        test_rows,
    })
}

fn with_reg_base(metrics: &MetricConfig) -> MetricConfig {
    let mut m = metrics.clone();
    if !m.metrics.contains(&Metric::RegBase) {
        m.metrics.push(Metric::RegBase);
    }
    m
}

/// Outcome of a monolingual evaluation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Test ρ of every single metric, then `RegEMT` and `Reg-base`.
    pub results: Vec<(String, f64)>,
    /// Pairwise metric correlations on the test split.
    pub correlations: CorrelationReport,
    pub model: EnsembleModel,
    pub reg_base: EnsembleModel,
    pub prepared: PreparedData,
    pub placeholders: Vec<f64>,
}

impl Evaluation {
    pub fn rho(&self, name: &str) -> Option<f64> {
        self.results.iter().find(|(n, _)| n == name).map(|(_, r)| *r)
    }

    /// One header line and one row named `dataset`.
    pub fn write_results<W: Write>(&self, mut out: W, dataset: &str) -> Result<()> {
        write!(out, "dataset")?;
        for (n, _) in &self.results {
            write!(out, "\t{n}")?;
        }
        writeln!(out)?;
        write!(out, "{dataset}")?;
        for (_, r) in &self.results {
            write!(out, "\t{}", fixed6(*r))?;
        }
        writeln!(out)?;
        Ok(())
    }
}

/// Fits RegEMT over every feature column and Reg-base over the surface
/// features on the train split, and reports test correlations. Reg-base
/// features are added to the configuration if missing.
pub fn evaluate(input: &ScoringInput<'_>, cfg: &PipelineConfig) -> Result<Evaluation> {
    let metrics = with_reg_base(&cfg.metrics);
    let prepared = prepare(input, &metrics, cfg.train_ratio, cfg.seed)?;
    let placeholders = prepared.placeholders();
    let (train, test) = prepared.split(&placeholders)?;

    let mut results = Vec::new();
    for name in train.x.names() {
        if name.starts_with(REG_BASE_PREFIX) {
            continue;
        }
        let col = test.x.column_by_name(name).expect("same columns");
        results.push((name.clone(), spearman(&col, &test.gold)?));
    }

    let model = select_model(&train.x, &train.gold, &train.groups, cfg.seed, &cfg.training)?;
    results.push(("RegEMT".into(), spearman(&predict(&model, &test.x)?, &test.gold)?));

    let surface: Vec<String> = train
        .x
        .names()
        .iter()
        .filter(|n| n.starts_with(REG_BASE_PREFIX))
        .cloned()
        .collect();
    let reg_base = select_model(&train.x.select_columns(&surface)?, &train.gold, &train.groups, cfg.seed, &cfg.training)?;
    let pred = predict(&reg_base, &test.x.select_columns(&surface)?)?;
    results.push(("Reg-base".into(), spearman(&pred, &test.gold)?));

    let correlations = correlation_report(&test.x, &test.gold)?;
    Ok(Evaluation {
        results,
        correlations,
        model,
        reg_base,
        prepared,
        placeholders,
    })
}

/// Correlation-driven ablation over the configured features.
pub fn ablate(input: &ScoringInput<'_>, cfg: &PipelineConfig) -> Result<AblationCurve> {
    let prepared = prepare(input, &cfg.metrics, cfg.train_ratio, cfg.seed)?;
    let (train, test) = prepared.split(&prepared.placeholders())?;
    ablation(&train.x, &test.x, &train.gold, &test.gold, &train.groups, cfg.seed, &cfg.training)
}

/// Fits the ensemble on the train split of `fit` and returns its Spearman ρ
/// on the test split of `eval`. Each dataset is scored with its own
/// vocabulary and similarity matrices; placeholders come from the `fit`
/// train split.
pub fn cross_lingual_eval(fit: &ScoringInput<'_>, eval: &ScoringInput<'_>, cfg: &PipelineConfig) -> Result<f64> {
    let fit_data = prepare(fit, &cfg.metrics, cfg.train_ratio, cfg.seed)?;
    let eval_data = prepare(eval, &cfg.metrics, cfg.train_ratio, cfg.seed)?;
    let placeholders = fit_data.placeholders();
    let (train, _) = fit_data.split(&placeholders)?;
    if eval_data.table.columns() != train.x.names() {
        return Err(Error::FeatureMismatch {
            expected: train.x.names().to_vec(),
            found: eval_data.table.columns().to_vec(),
        });
    }
    let (_, test) = eval_data.split(&placeholders)?;
    let model = select_model(&train.x, &train.gold, &train.groups, cfg.seed, &cfg.training)?;
    spearman(&predict(&model, &test.x)?, &test.gold)
}
