//! Vocabularies, SMART-weighted bag-of-words vectors and the sparse term
//! similarity matrix used by the soft cosine measure.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::embeddings::{cosine_unchecked, EmbeddingStore};
use crate::error::{Error, Result};

/// Terms in first-occurrence order with document frequencies.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    df: Vec<usize>,
    n_docs: usize,
}

impl Vocabulary {
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    /// Document frequency; 0 for unknown terms.
    pub fn df(&self, term: &str) -> usize {
        self.index_of(term).map_or(0, |i| self.df[i])
    }

    pub fn df_at(&self, index: usize) -> usize {
        self.df[index]
    }

    /// `ln(n_docs / df)`, with `df = 0` treated as 1.
    pub fn idf(&self, term: &str) -> f64 {
        idf(self.n_docs, self.df(term))
    }

    pub fn idf_at(&self, index: usize) -> f64 {
        idf(self.n_docs, self.df[index])
    }
}

fn idf(n_docs: usize, df: usize) -> f64 {
    (n_docs as f64 / df.max(1) as f64).ln()
}

/// Builds a vocabulary where every token list counts as one document.
pub fn build_vocabulary<D, T>(documents: &[D]) -> Vocabulary
where
    D: AsRef<[T]>,
    T: AsRef<str>,
{
    let mut vocab = Vocabulary {
        n_docs: documents.len(),
        ..Default::default()
    };
    let mut last_doc: Vec<usize> = Vec::new();
    for (d, doc) in documents.iter().enumerate() {
        for token in doc.as_ref() {
            let token = token.as_ref();
            let i = match vocab.index.get(token) {
                Some(&i) => i,
                None => {
                    let i = vocab.terms.len();
                    vocab.terms.push(token.to_string());
                    vocab.index.insert(token.to_string(), i);
                    vocab.df.push(0);
                    last_doc.push(usize::MAX);
                    i
                }
            };
            if last_doc[i] != d {
                last_doc[i] = d;
                vocab.df[i] += 1;
            }
        }
    }
    vocab
}

/// Sparse nonnegative term weights keyed by vocabulary index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightedBow {
    entries: BTreeMap<usize, f64>,
}

impl WeightedBow {
    pub fn from_entries(entries: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut bow = WeightedBow::default();
        for (i, w) in entries {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::invalid(format!("weight {w} at term {i} is not a finite nonnegative number")));
            }
            *bow.entries.entry(i).or_insert(0.0) += w;
        }
        Ok(bow)
    }

    pub fn entries(&self) -> &BTreeMap<usize, f64> {
        &self.entries
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries.get(&index).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True when every weight is zero (including the empty vector).
    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|&w| w == 0.0)
    }
}

fn counts<T: AsRef<str>>(tokens: &[T], vocab: &Vocabulary) -> BTreeMap<usize, f64> {
    let mut out = BTreeMap::new();
    for t in tokens {
        if let Some(i) = vocab.index_of(t.as_ref()) {
            *out.entry(i).or_insert(0.0) += 1.0;
        }
    }
    out
}

/// Raw term frequencies (`nnx`); out-of-vocabulary tokens are dropped.
pub fn bow_nnx<T: AsRef<str>>(tokens: &[T], vocab: &Vocabulary) -> WeightedBow {
    WeightedBow {
        entries: counts(tokens, vocab),
    }
}

/// Term frequency times inverse document frequency (`nfx`).
pub fn bow_nfx<T: AsRef<str>>(tokens: &[T], vocab: &Vocabulary) -> Result<WeightedBow> {
    if vocab.n_docs == 0 {
        return Err(Error::invalid("tf-idf weighting needs a vocabulary built from at least one document"));
    }
    let mut entries = counts(tokens, vocab);
    for (&i, w) in entries.iter_mut() {
        *w *= vocab.idf_at(i);
    }
    Ok(WeightedBow { entries })
}

/// Order in which rows of the similarity matrix are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermOrder {
    Vocabulary,
    IdfDescending,
}

/// Knobs for [`build_similarity_matrix`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimilarityParams {
    pub threshold: f64,
    pub exponent: f64,
    pub top_k: usize,
}

impl Default for SimilarityParams {
    fn default() -> Self {
        SimilarityParams {
            threshold: 0.1,
            exponent: 2.0,
            top_k: 100,
        }
    }
}

/// Sparse symmetric matrix with an implicit unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    rows: Vec<BTreeMap<usize, f64>>,
}

impl SimilarityMatrix {
    pub fn identity(dim: usize) -> Self {
        SimilarityMatrix {
            rows: vec![BTreeMap::new(); dim],
        }
    }

    /// Builds a matrix from off-diagonal pairs; each pair is mirrored.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut m = SimilarityMatrix::identity(dim);
        for (i, j, s) in pairs {
            if i >= dim || j >= dim {
                return Err(Error::invalid(format!("pair ({i}, {j}) outside dimension {dim}")));
            }
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::invalid(format!("similarity {s} outside [0, 1]")));
            }
            if i != j && s > 0.0 {
                m.rows[i].insert(j, s);
                m.rows[j].insert(i, s);
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            1.0
        } else {
            self.rows[i].get(&j).copied().unwrap_or(0.0)
        }
    }

    /// Off-diagonal nonzeros of row `i`.
    pub fn row(&self, i: usize) -> &BTreeMap<usize, f64> {
        &self.rows[i]
    }

    pub fn is_identity(&self) -> bool {
        self.rows.iter().all(BTreeMap::is_empty)
    }

    /// `xᵀ S y`.
    pub fn inner(&self, x: &WeightedBow, y: &WeightedBow) -> f64 {
        let mut total = 0.0;
        for (&i, &xi) in x.entries() {
            let mut acc = y.get(i);
            for (&j, &s) in &self.rows[i] {
                acc += s * y.get(j);
            }
            total += xi * acc;
        }
        total
    }

    /// Writes the upper triangle as `i<TAB>j<TAB>s` lines, diagonal included.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "i\tj\ts")?;
        for (i, row) in self.rows.iter().enumerate() {
            writeln!(out, "{i}\t{i}\t{:.6}", 1.0)?;
            for (&j, &s) in row.range(i + 1..) {
                writeln!(out, "{i}\t{j}\t{s:.6}")?;
            }
        }
        Ok(())
    }
}

/// Greedily fills a sparse term similarity matrix.
///
/// Rows are visited in `order`. For each term, the other embedded terms are
/// ranked by `max(0, cos)^exponent` (ties by vocabulary index) and accepted
/// while the value reaches `threshold` and both rows still have fewer than
/// `top_k` off-diagonal entries. Zero similarities are never stored and
/// terms without an embedding keep only their diagonal.
pub fn build_similarity_matrix(
    vocab: &Vocabulary,
    store: &EmbeddingStore,
    order: TermOrder,
    params: SimilarityParams,
) -> Result<SimilarityMatrix> {
    if params.top_k == 0 {
        return Err(Error::invalid("top_k must be at least 1"));
    }
    let n = vocab.len();
    let vectors: Vec<Option<&[f64]>> = vocab.terms().iter().map(|t| store.get(t)).collect();
    let embedded: Vec<usize> = (0..n).filter(|&i| vectors[i].is_some()).collect();

    let mut visit: Vec<usize> = (0..n).collect();
    if order == TermOrder::IdfDescending {
        // stable: equal df keeps vocabulary order
        visit.sort_by_key(|&i| vocab.df_at(i));
    }

    let mut matrix = SimilarityMatrix::identity(n);
    for &i in &visit {
        let Some(vi) = vectors[i] else { continue };
        if matrix.rows[i].len() >= params.top_k {
            continue;
        }
        let mut candidates: Vec<(usize, f64)> = embedded
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| {
                let cos = cosine_unchecked(vi, vectors[j].unwrap()).clamp(0.0, 1.0);
                (j, cos.powf(params.exponent))
            })
            .filter(|&(_, s)| s > 0.0 && s >= params.threshold)
            .collect();
        candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for (j, s) in candidates {
            if matrix.rows[i].len() >= params.top_k {
                break;
            }
            if matrix.rows[i].contains_key(&j) || matrix.rows[j].len() >= params.top_k {
                continue;
            }
            matrix.rows[i].insert(j, s);
            matrix.rows[j].insert(i, s);
        }
    }
    Ok(matrix)
}
