use std::path::{Path, PathBuf};

use serde::Deserialize;

use regemt::corpus::{load_dataset, Dataset, Format};
use regemt::embeddings::{load_contextual, load_static};
use regemt::ensemble::TrainingConfig;
use regemt::evaluation::PipelineConfig;
use regemt::metrics::{load_external_scores, ExternalScores, Metric, MetricConfig, Mode, Resources};
use regemt::tokenize::WordPieceVocab;
use regemt::vsm::SimilarityParams;

pub const CONFIG_HELP: &str = "\
CONFIG FILE
  A single JSON object. Relative paths are resolved against the directory of
  the config file. Unknown keys are rejected.

  dataset                      path to a .tsv or .json dataset (required)
  format                       \"tsv\" | \"json\" (default: from the file extension)
  mode                         \"reference_based\" | \"source_based\" (default: reference_based)
  metrics                      list of metric names (required), e.g.
                               [\"SCM\", \"WMD-decontextualized-tfidf\", \"BLEU\", \"Reg-base\"]
  similarity.threshold         minimum term similarity kept in S (default: 0.1)
  similarity.exponent          exponent applied to clipped cosines (default: 2)
  similarity.top_k             nonzero entries per row of S (default: 100)
  compositionality_full_matrix compare every transition cell (default: false)
  bleu_max_n                   highest BLEU n-gram order (default: 4)
  lowercase                    lowercase before tokenization (default: false)
  resources.static_vectors     word-vector text file
  resources.contextual_records contextual-embedding TSV
  resources.wordpiece_vocab    WordPiece vocabulary, one entry per line
  resources.external_scores    TSV of precomputed scores keyed by segment_id
  split.seed                   seed for splits and training (required)
  split.train_ratio            share of unique sources in train (default: 0.8)
  training.hidden              perceptron hidden units (default: 100)
  training.learning_rate       Adam step size (default: 0.001)
  training.batch_size          mini-batch size (default: 32)
  training.max_epochs          epoch cap (default: 500)
  training.patience            early-stopping patience in epochs (default: 25)
  training.validation_fraction early-stopping holdout share (default: 0.1)
  output_dir                   where reports are written (default: \"out\"; --out wins)

EXIT CODES
  0 success, 1 invalid configuration, 2 data or runtime error";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourcePaths {
    pub static_vectors: Option<PathBuf>,
    pub contextual_records: Option<PathBuf>,
    pub wordpiece_vocab: Option<PathBuf>,
    pub external_scores: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub seed: u64,
    #[serde(default = "default_ratio")]
    pub train_ratio: f64,
}

fn default_ratio() -> f64 {
    0.8
}

fn default_mode() -> Mode {
    Mode::ReferenceBased
}

fn default_bleu() -> usize {
    4
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: PathBuf,
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub similarity: SimilarityParams,
    #[serde(default)]
    pub compositionality_full_matrix: bool,
    #[serde(default = "default_bleu")]
    pub bleu_max_n: usize,
    #[serde(default)]
    pub lowercase: bool,
    #[serde(default)]
    pub resources: ResourcePaths,
    pub split: SplitConfig,
    #[serde(default)]
    pub training: TrainingConfig,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
}

/// Everything a subcommand needs after loading.
pub struct Loaded {
    pub dataset: Dataset,
    pub resources: Resources,
    pub external: Option<ExternalScores>,
}

impl RunConfig {
    /// Parses the file and makes relative paths absolute.
    pub fn read(path: &Path) -> Result<RunConfig, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut cfg.dataset);
        fix(&mut cfg.output_dir);
        for p in [
            &mut cfg.resources.static_vectors,
            &mut cfg.resources.contextual_records,
            &mut cfg.resources.wordpiece_vocab,
            &mut cfg.resources.external_scores,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        Ok(cfg)
    }

    pub fn metric_config(&self) -> MetricConfig {
        MetricConfig {
            mode: self.mode,
            metrics: self.metrics.clone(),
            similarity: self.similarity,
            compositionality_full_matrix: self.compositionality_full_matrix,
            bleu_max_n: self.bleu_max_n,
            lowercase: self.lowercase,
        }
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            metrics: self.metric_config(),
            train_ratio: self.split.train_ratio,
            seed: self.split.seed,
            training: self.training,
        }
    }

    /// Problems detectable without reading data: metric selection, split
    /// ratio and missing files. `needs_reg_base` adds the surface features
    /// that `evaluate` always reports.
    pub fn problems(&self, needs_reg_base: bool) -> Vec<String> {
        let mut metrics = self.metric_config();
        if needs_reg_base && !metrics.metrics.contains(&Metric::RegBase) {
            metrics.metrics.push(Metric::RegBase);
        }
        let mut out = metrics.problems();
        if !(self.split.train_ratio > 0.0 && self.split.train_ratio < 1.0) {
            out.push(format!("split.train_ratio {} outside (0, 1)", self.split.train_ratio));
        }
        let r = &self.resources;
        for (key, path) in [
            ("dataset", Some(&self.dataset)),
            ("resources.static_vectors", r.static_vectors.as_ref()),
            ("resources.contextual_records", r.contextual_records.as_ref()),
            ("resources.wordpiece_vocab", r.wordpiece_vocab.as_ref()),
            ("resources.external_scores", r.external_scores.as_ref()),
        ] {
            if let Some(p) = path {
                if !p.is_file() {
                    out.push(format!("{key}: no such file {}", p.display()));
                }
            }
        }
        // resource presence per metric is checked by the scorer; repeat it
        // here so that all problems surface before any file is parsed
        let needs = |pred: fn(&Metric) -> bool| metrics.metrics.iter().filter(|m| pred(m)).copied().collect::<Vec<_>>();
        use regemt::metrics::Embedding;
        let statics = needs(|m| matches!(m, Metric::Scm { embedding: Embedding::Static, .. } | Metric::Wmd { embedding: Embedding::Static, .. }));
        let records = needs(|m| matches!(m, Metric::Scm { embedding: Embedding::Decontextualized | Embedding::Contextual, .. } | Metric::Wmd { embedding: Embedding::Decontextualized | Embedding::Contextual, .. }));
        let pieces = needs(|m| matches!(m, Metric::RegBase | Metric::Scm { embedding: Embedding::Decontextualized, .. } | Metric::Wmd { embedding: Embedding::Decontextualized, .. }));
        for (list, path, key) in [
            (statics, &r.static_vectors, "resources.static_vectors"),
            (records, &r.contextual_records, "resources.contextual_records"),
            (pieces, &r.wordpiece_vocab, "resources.wordpiece_vocab"),
        ] {
            if path.is_none() {
                for m in list {
                    out.push(format!("metric `{m}` needs {key}"));
                }
            }
        }
        out
    }

    pub fn load(&self) -> regemt::Result<Loaded> {
        let format = self.format.unwrap_or_else(|| Format::from_path(&self.dataset));
        let dataset = load_dataset(&self.dataset, format)?;
        let r = &self.resources;
        let resources = Resources {
            static_vectors: r.static_vectors.as_ref().map(load_static).transpose()?,
            contextual: r.contextual_records.as_ref().map(load_contextual).transpose()?,
            wordpiece: r.wordpiece_vocab.as_ref().map(WordPieceVocab::load).transpose()?,
        };
        let external = r.external_scores.as_ref().map(load_external_scores).transpose()?;
        Ok(Loaded {
            dataset,
            resources,
            external,
        })
    }
}
