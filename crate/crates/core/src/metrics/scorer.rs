use std::borrow::Cow;
use std::collections::HashMap;

use rayon::prelude::*;

use crate::corpus::{Dataset, Segment, Side};
use crate::embeddings::{decontextualize, ContextualRecord, EmbeddingStore};
use crate::error::{Error, Result};
use crate::metrics::table::ScoreTable;
use crate::metrics::{
    compositionality, reg_base_features, scm, sentence_bleu, transition_graph, wmd, wmd_contextual,
    Embedding, Metric, MetricConfig, Mode, Weighting,
};
use crate::tokenize::{whitespace_tokenize, wordpiece_tokenize, WordPieceVocab};
use crate::vsm::{
    bow_nfx, bow_nnx, build_similarity_matrix, build_vocabulary, SimilarityMatrix, Vocabulary, WeightedBow,
};

/// Externally supplied inputs the metrics draw on.
#[derive(Debug, Clone, Default)]
pub struct Resources {
    pub static_vectors: Option<EmbeddingStore>,
    pub contextual: Option<Vec<ContextualRecord>>,
    pub wordpiece: Option<WordPieceVocab>,
}

/// Raw scores of one segment, aligned with [`Scorer::columns`]. `None`
/// marks an unscorable metric; the placeholder is chosen later from the
/// train split.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricVector {
    pub segment_id: String,
    pub values: Vec<Option<f64>>,
}

struct Space<'a> {
    vocab: Vocabulary,
    store: Cow<'a, EmbeddingStore>,
    matrices: HashMap<Weighting, SimilarityMatrix>,
}

struct ContextualIndex<'a> {
    occurrences: HashMap<(&'a str, Side), Vec<&'a ContextualRecord>>,
    vocab: Vocabulary,
}

/// Metric scorer prepared for one dataset.
///
/// Construction validates the configuration against the resources and the
/// data and reports every problem at once. Vocabularies, document
/// frequencies and similarity matrices are built from all texts of the
/// dataset, one document per segment side.
pub struct Scorer<'a> {
    config: MetricConfig,
    columns: Vec<String>,
    static_space: Option<Space<'a>>,
    decontextualized: Option<Space<'a>>,
    contextual: Option<ContextualIndex<'a>>,
    wordpiece: Option<Cow<'a, WordPieceVocab>>,
}

impl<'a> Scorer<'a> {
    pub fn new(dataset: &Dataset, config: &MetricConfig, resources: &'a Resources) -> Result<Self> {
        let problems = check(dataset, config, resources);
        if !problems.is_empty() {
            return Err(Error::Config(problems));
        }
        let wants = |pred: fn(&Metric) -> bool| config.metrics.iter().any(pred);
        let weightings = |embedding: Embedding| -> Vec<Weighting> {
            let mut ws = Vec::new();
            for m in &config.metrics {
                if let Metric::Scm { embedding: e, weighting } = m {
                    if *e == embedding && !ws.contains(weighting) {
                        ws.push(*weighting);
                    }
                }
            }
            ws
        };
        let lower = config.lowercase;

        let wordpiece = resources.wordpiece.as_ref().map(|w| {
            if lower {
                Cow::Owned(w.clone().with_lowercase(true))
            } else {
                Cow::Borrowed(w)
            }
        });

        let static_space = if wants(|m| {
            matches!(m, Metric::Scm { embedding: Embedding::Static, .. } | Metric::Wmd { embedding: Embedding::Static, .. })
        }) {
            let docs = documents(dataset, |t| whitespace_tokens(t, lower));
            let store = resources.static_vectors.as_ref().expect("checked");
            Some(Space::build(docs, Cow::Borrowed(store), &weightings(Embedding::Static), config)?)
        } else {
            None
        };

        let decontextualized = if wants(|m| {
            matches!(
                m,
                Metric::Scm { embedding: Embedding::Decontextualized, .. }
                    | Metric::Wmd { embedding: Embedding::Decontextualized, .. }
            )
        }) {
            let wp = wordpiece.as_deref().expect("checked");
            let docs = documents(dataset, |t| wordpiece_tokenize(t, wp));
            let store = decontextualize(resources.contextual.as_deref().expect("checked"))?;
            Some(Space::build(docs, Cow::Owned(store), &weightings(Embedding::Decontextualized), config)?)
        } else {
            None
        };

        let contextual = if wants(|m| matches!(m, Metric::Wmd { embedding: Embedding::Contextual, .. })) {
            let records = resources.contextual.as_deref().expect("checked");
            let mut occurrences: HashMap<(&str, Side), Vec<&ContextualRecord>> = HashMap::new();
            for r in records {
                occurrences.entry((r.segment_id.as_str(), r.side)).or_default().push(r);
            }
            for list in occurrences.values_mut() {
                list.sort_by_key(|r| r.token_index);
            }
            let mut keys: Vec<_> = occurrences.keys().copied().collect();
            keys.sort();
            let docs: Vec<Vec<&str>> = keys
                .iter()
                .map(|k| occurrences[k].iter().map(|r| r.token.as_str()).collect())
                .collect();
            let vocab = build_vocabulary(&docs);
            Some(ContextualIndex { occurrences, vocab })
        } else {
            None
        };

        Ok(Scorer {
            config: config.clone(),
            columns: config.columns(),
            static_space,
            decontextualized,
            contextual,
            wordpiece,
        })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn config(&self) -> &MetricConfig {
        &self.config
    }

    fn x_side(&self) -> Side {
        match self.config.mode {
            Mode::ReferenceBased => Side::Reference,
            Mode::SourceBased => Side::Source,
        }
    }

    /// Scores every configured metric for one segment.
    pub fn score_segment(&self, segment: &Segment) -> Result<MetricVector> {
        let side = self.x_side();
        let x_text = segment
            .text(side)
            .ok_or_else(|| Error::invalid(format!("segment `{}` has no {side:?} text", segment.id)))?;
        let y_text = segment.hypothesis.as_str();
        let mut values = Vec::with_capacity(self.columns.len());
        for metric in &self.config.metrics {
            match metric {
                Metric::Scm { embedding, weighting } => {
                    let space = self.space(*embedding);
                    let (x, y) = self.bows(space, *embedding, *weighting, x_text, y_text)?;
                    let s = scm(&x, &y, &space.matrices[weighting]);
                    values.push((!s.empty).then_some(s.value));
                }
                Metric::Wmd { embedding: Embedding::Contextual, weighting } => {
                    let idx = self.contextual.as_ref().expect("built");
                    let get = |s: Side| idx.occurrences.get(&(segment.id.as_str(), s)).map_or(&[][..], Vec::as_slice);
                    values.push(unscorable_to_none(wmd_contextual(
                        get(side),
                        get(Side::Hypothesis),
                        *weighting,
                        &idx.vocab,
                    ))?);
                }
                Metric::Wmd { embedding, weighting } => {
                    let space = self.space(*embedding);
                    let (x, y) = self.bows(space, *embedding, *weighting, x_text, y_text)?;
                    values.push(unscorable_to_none(wmd(&x, &y, &space.vocab, &space.store))?);
                }
                Metric::Compositionality => {
                    let tags = |s: Side| {
                        segment.pos(s).ok_or_else(|| {
                            Error::invalid(format!("segment `{}` has no {s:?} PoS tags", segment.id))
                        })
                    };
                    let gx = transition_graph(tags(side)?)?;
                    let gy = transition_graph(tags(Side::Hypothesis)?)?;
                    values.push(Some(compositionality(&gx, &gy, self.config.compositionality_full_matrix)));
                }
                Metric::Bleu => {
                    let (r, h) = (whitespace_tokens(x_text, self.config.lowercase), whitespace_tokens(y_text, self.config.lowercase));
                    values.push(Some(sentence_bleu(&r, &h, self.config.bleu_max_n)));
                }
                Metric::RegBase => {
                    let wp = self.wordpiece.as_deref().expect("checked");
                    values.extend(reg_base_features(segment, wp, self.config.mode)?.map(Some));
                }
            }
        }
        Ok(MetricVector {
            segment_id: segment.id.clone(),
            values,
        })
    }

    /// Scores all segments, in parallel on the current rayon pool. Results
    /// are gathered in segment order.
    pub fn score_all(&self, dataset: &Dataset) -> Result<ScoreTable> {
        let vectors = dataset
            .segments
            .par_iter()
            .map(|s| self.score_segment(s))
            .collect::<Result<Vec<_>>>()?;
        let polarity = self
            .config
            .metrics
            .iter()
            .flat_map(|m| {
                let p = (!matches!(m, Metric::RegBase)).then(|| m.polarity());
                std::iter::repeat_n(p, m.columns(self.config.mode).len())
            })
            .collect();
        ScoreTable::from_vectors(self.columns.clone(), polarity, vectors)
    }

    fn space(&self, embedding: Embedding) -> &Space<'a> {
        match embedding {
            Embedding::Static => self.static_space.as_ref(),
            Embedding::Decontextualized => self.decontextualized.as_ref(),
            Embedding::Contextual => None,
        }
        .expect("space built for every configured embedding")
    }

    fn bows(
        &self,
        space: &Space<'_>,
        embedding: Embedding,
        weighting: Weighting,
        x: &str,
        y: &str,
    ) -> Result<(WeightedBow, WeightedBow)> {
        let tokens = |t: &str| -> Vec<String> {
            match embedding {
                Embedding::Static => whitespace_tokens(t, self.config.lowercase),
                _ => wordpiece_tokenize(t, self.wordpiece.as_deref().expect("checked")),
            }
        };
        let (tx, ty) = (tokens(x), tokens(y));
        Ok(match weighting {
            Weighting::Nnx => (bow_nnx(&tx, &space.vocab), bow_nnx(&ty, &space.vocab)),
            Weighting::Nfx => (bow_nfx(&tx, &space.vocab)?, bow_nfx(&ty, &space.vocab)?),
        })
    }
}

impl<'a> Space<'a> {
    fn build(
        docs: Vec<Vec<String>>,
        store: Cow<'a, EmbeddingStore>,
        weightings: &[Weighting],
        config: &MetricConfig,
    ) -> Result<Self> {
        let vocab = build_vocabulary(&docs);
        let mut matrices = HashMap::new();
        for &w in weightings {
            let m = build_similarity_matrix(&vocab, &store, w.term_order(), config.similarity)?;
            matrices.insert(w, m);
        }
        Ok(Space { vocab, store, matrices })
    }
}

fn whitespace_tokens(text: &str, lowercase: bool) -> Vec<String> {
    if lowercase {
        whitespace_tokenize(&text.to_lowercase()).into_iter().map(str::to_string).collect()
    } else {
        whitespace_tokenize(text).into_iter().map(str::to_string).collect()
    }
}

fn documents(dataset: &Dataset, tokenize: impl Fn(&str) -> Vec<String>) -> Vec<Vec<String>> {
    let mut docs = Vec::new();
    for seg in &dataset.segments {
        for side in [Side::Source, Side::Reference, Side::Hypothesis] {
            if let Some(text) = seg.text(side) {
                docs.push(tokenize(text));
            }
        }
    }
    docs
}

fn unscorable_to_none(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Unscorable(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn check(dataset: &Dataset, config: &MetricConfig, resources: &Resources) -> Vec<String> {
    let mut out = config.problems();
    let x_side = match config.mode {
        Mode::ReferenceBased => Side::Reference,
        Mode::SourceBased => Side::Source,
    };
    if config.mode == Mode::ReferenceBased {
        if let Some(s) = dataset.segments.iter().find(|s| s.reference.is_none()) {
            out.push(format!("reference-based mode but segment `{}` has no reference", s.id));
        }
    }
    for m in &config.metrics {
        let (needs_static, needs_records, needs_wordpiece) = match m {
            Metric::Scm { embedding, .. } | Metric::Wmd { embedding, .. } => match embedding {
                Embedding::Static => (true, false, false),
                Embedding::Decontextualized => (false, true, true),
                Embedding::Contextual => (false, true, false),
            },
            Metric::RegBase => (false, false, true),
            Metric::Compositionality | Metric::Bleu => (false, false, false),
        };
        if needs_static && resources.static_vectors.is_none() {
            out.push(format!("metric `{m}` needs static word vectors"));
        }
        if needs_records && resources.contextual.as_ref().is_none_or(|r| r.is_empty()) {
            out.push(format!("metric `{m}` needs contextual embedding records"));
        }
        if needs_wordpiece && resources.wordpiece.is_none() {
            out.push(format!("metric `{m}` needs a WordPiece vocabulary"));
        }
        if *m == Metric::Compositionality {
            for side in [x_side, Side::Hypothesis] {
                if let Some(s) = dataset.segments.iter().find(|s| s.pos(side).is_none()) {
                    out.push(format!(
                        "metric `{m}` needs {side:?} PoS tags, missing for segment `{}`",
                        s.id
                    ));
                }
            }
        }
    }
    out
}
