//! Segment-level metrics and the configuration selecting them.
//!
//! Individual scorers live in submodules; [`Scorer`] ties them to a dataset
//! and its resources and produces one [`MetricVector`] per segment.

pub mod bleu;
pub mod compositionality;
pub mod flow;
pub mod scm;
mod scorer;
pub mod surface;
mod table;
pub mod wmd;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vsm::{SimilarityParams, TermOrder};

pub use bleu::sentence_bleu;
pub use compositionality::{compositionality, transition_graph, TransitionMatrix};
pub use flow::{transport, FlowSolution};
pub use scm::{scm, ScmScore};
pub use scorer::{MetricVector, Resources, Scorer};
pub use surface::reg_base_features;
pub use table::{load_external_scores, ExternalScores, ScoreTable};
pub use wmd::{wmd, wmd_contextual};

/// Whether hypotheses are compared with references or with sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    ReferenceBased,
    SourceBased,
}

/// SMART weighting of bag-of-words vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Weighting {
    /// raw term frequency
    Nnx,
    /// term frequency × idf
    Nfx,
}

impl Weighting {
    /// Row order for the similarity matrix that goes with this weighting.
    pub fn term_order(self) -> TermOrder {
        match self {
            Weighting::Nnx => TermOrder::Vocabulary,
            Weighting::Nfx => TermOrder::IdfDescending,
        }
    }
}

/// Where token vectors come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Embedding {
    /// whole-token static vectors, whitespace tokens
    Static,
    /// per-WordPiece averages of contextual vectors
    Decontextualized,
    /// one vector per token occurrence (WMD only)
    Contextual,
}

/// Whether larger scores mean better translations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Similarity,
    Distance,
}

/// One configurable metric. Serialized by its report name, e.g.
/// `"SCM-decontextualized-tfidf"` or `"WMD-contextual"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Metric {
    Scm { embedding: Embedding, weighting: Weighting },
    Wmd { embedding: Embedding, weighting: Weighting },
    Compositionality,
    Bleu,
    /// The four surface-length features fed to the Reg-base regressor.
    RegBase,
}

impl Metric {
    /// Every metric the toolkit knows, in report order.
    pub fn all() -> Vec<Metric> {
        use Embedding::*;
        use Weighting::*;
        let mut out = Vec::new();
        for embedding in [Static, Decontextualized] {
            for weighting in [Nnx, Nfx] {
                out.push(Metric::Scm { embedding, weighting });
            }
        }
        for embedding in [Static, Decontextualized, Contextual] {
            for weighting in [Nnx, Nfx] {
                out.push(Metric::Wmd { embedding, weighting });
            }
        }
        out.extend([Metric::Compositionality, Metric::Bleu, Metric::RegBase]);
        out
    }

    pub fn name(&self) -> String {
        let variant = |family: &str, e: &Embedding, w: &Weighting| {
            let mut s = family.to_string();
            match e {
                Embedding::Static => {}
                Embedding::Decontextualized => s.push_str("-decontextualized"),
                Embedding::Contextual => s.push_str("-contextual"),
            }
            if *w == Weighting::Nfx {
                s.push_str("-tfidf");
            }
            s
        };
        match self {
            Metric::Scm { embedding, weighting } => variant("SCM", embedding, weighting),
            Metric::Wmd { embedding, weighting } => variant("WMD", embedding, weighting),
            Metric::Compositionality => "Compositionality".into(),
            Metric::Bleu => "BLEU".into(),
            Metric::RegBase => "Reg-base".into(),
        }
    }

    pub fn polarity(&self) -> Polarity {
        match self {
            Metric::Wmd { .. } | Metric::Compositionality => Polarity::Distance,
            _ => Polarity::Similarity,
        }
    }

    /// Usable without a reference, i.e. across languages.
    pub fn cross_lingual(&self) -> bool {
        match self {
            Metric::Scm { embedding, .. } | Metric::Wmd { embedding, .. } => {
                *embedding != Embedding::Static
            }
            Metric::Compositionality | Metric::RegBase => true,
            Metric::Bleu => false,
        }
    }

    /// Output column names; one per metric except Reg-base, which has four.
    pub fn columns(&self, mode: Mode) -> Vec<String> {
        match self {
            Metric::RegBase => {
                let x = match mode {
                    Mode::ReferenceBased => "ref",
                    Mode::SourceBased => "src",
                };
                vec![
                    format!("Reg-base:{x}-chars"),
                    "Reg-base:hyp-chars".into(),
                    format!("Reg-base:{x}-pieces"),
                    "Reg-base:hyp-pieces".into(),
                ]
            }
            other => vec![other.name()],
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::all()
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let known: Vec<String> = Metric::all().iter().map(Metric::name).collect();
                Error::invalid(format!("unknown metric `{s}` (known: {})", known.join(", ")))
            })
    }
}

impl TryFrom<String> for Metric {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Metric> for String {
    fn from(m: Metric) -> String {
        m.name()
    }
}

/// Metric selection plus the parameters shared by the variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricConfig {
    pub mode: Mode,
    pub metrics: Vec<Metric>,
    pub similarity: SimilarityParams,
    /// Compositionality over all transition cells instead of self-transitions.
    pub compositionality_full_matrix: bool,
    pub bleu_max_n: usize,
    /// Lowercase text before WordPiece segmentation.
    pub lowercase: bool,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            mode: Mode::ReferenceBased,
            metrics: Vec::new(),
            similarity: SimilarityParams::default(),
            compositionality_full_matrix: false,
            bleu_max_n: 4,
            lowercase: false,
        }
    }
}

impl MetricConfig {
    pub fn new(mode: Mode, metrics: Vec<Metric>) -> Self {
        MetricConfig {
            mode,
            metrics,
            ..Default::default()
        }
    }

    /// Column names in configuration order.
    pub fn columns(&self) -> Vec<String> {
        self.metrics.iter().flat_map(|m| m.columns(self.mode)).collect()
    }

    /// Checks the configuration on its own, without resources.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.metrics.is_empty() {
            out.push("no metrics enabled".to_string());
        }
        let mut seen = std::collections::HashSet::new();
        for m in &self.metrics {
            if !seen.insert(*m) {
                out.push(format!("metric `{m}` enabled twice"));
            }
            if let Metric::Scm { embedding: Embedding::Contextual, .. } = m {
                out.push(format!("metric `{m}` does not exist"));
            }
            if self.mode == Mode::SourceBased && !m.cross_lingual() {
                out.push(format!("metric `{m}` is not available in source-based mode"));
            }
        }
        if self.bleu_max_n == 0 {
            out.push("bleu_max_n must be at least 1".to_string());
        }
        if self.similarity.top_k == 0 {
            out.push("similarity.top_k must be at least 1".to_string());
        }
        out
    }
}
