//! Evaluation datasets: loading, gold-score averaging and source-disjoint
//! splitting.
//!
//! A [`Dataset`] holds [`Segment`]s for a single language pair. Gold scores
//! are the arithmetic mean of all judgements attached to a segment, and
//! train/test splits never place the same source text on both sides.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::XorShift64;
use crate::tokenize::whitespace_tokenize;

/// Which side of a segment a text comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Source,
    Reference,
    Hypothesis,
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "source" | "src" => Ok(Side::Source),
            "reference" | "ref" => Ok(Side::Reference),
            "hypothesis" | "hyp" => Ok(Side::Hypothesis),
            other => Err(Error::invalid(format!("unknown side `{other}`"))),
        }
    }
}

/// One (source, reference?, hypothesis) evaluation unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub id: String,
    pub src_lang: String,
    pub tgt_lang: String,
    pub source: String,
    #[serde(default)]
    pub reference: Option<String>,
    pub hypothesis: String,
    #[serde(default)]
    pub judgements: Vec<f64>,
    #[serde(default)]
    pub pos_source: Option<Vec<String>>,
    #[serde(default)]
    pub pos_reference: Option<Vec<String>>,
    #[serde(default)]
    pub pos_hypothesis: Option<Vec<String>>,
}

impl Segment {
    pub fn text(&self, side: Side) -> Option<&str> {
        match side {
            Side::Source => Some(&self.source),
            Side::Reference => self.reference.as_deref(),
            Side::Hypothesis => Some(&self.hypothesis),
        }
    }

    pub fn pos(&self, side: Side) -> Option<&[String]> {
        match side {
            Side::Source => self.pos_source.as_deref(),
            Side::Reference => self.pos_reference.as_deref(),
            Side::Hypothesis => self.pos_hypothesis.as_deref(),
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.id.is_empty() {
            return Err("empty id".into());
        }
        if self.source.trim().is_empty() {
            return Err("empty source".into());
        }
        if self.hypothesis.trim().is_empty() {
            return Err("empty hypothesis".into());
        }
        if let Some(j) = self.judgements.iter().find(|j| !j.is_finite()) {
            return Err(format!("non-finite judgement {j}"));
        }
        for side in [Side::Source, Side::Reference, Side::Hypothesis] {
            if let (Some(tags), Some(text)) = (self.pos(side), self.text(side)) {
                let n = whitespace_tokenize(text).len();
                if tags.len() != n {
                    return Err(format!(
                        "{side:?} has {n} tokens but {} PoS tags",
                        tags.len()
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Segments of one language pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub segments: Vec<Segment>,
}

/// Averaged judgement of a single segment.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldScore {
    pub segment_id: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Tsv,
    Json,
}

impl Format {
    /// Guess from the file extension; anything but `.json` is read as TSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Tsv,
        }
    }
}

impl Dataset {
    /// Builds a dataset after checking id uniqueness, per-segment schema
    /// and the single-language-pair invariant.
    pub fn new(name: impl Into<String>, segments: Vec<Segment>) -> Result<Self> {
        let mut seen = HashSet::new();
        for seg in &segments {
            seg.validate()
                .map_err(|m| Error::invalid(format!("segment `{}`: {m}", seg.id)))?;
            if !seen.insert(seg.id.as_str()) {
                return Err(Error::DuplicateId(seg.id.clone()));
            }
        }
        if let Some(first) = segments.first() {
            if let Some(other) = segments
                .iter()
                .find(|s| s.src_lang != first.src_lang || s.tgt_lang != first.tgt_lang)
            {
                return Err(Error::invalid(format!(
                    "segment `{}` is {}-{}, dataset is {}-{}",
                    other.id, other.src_lang, other.tgt_lang, first.src_lang, first.tgt_lang
                )));
            }
        }
        Ok(Dataset {
            name: name.into(),
            segments,
        })
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.segments.iter().map(|s| s.id.as_str()).collect()
    }

    /// Gold scores for every segment, in segment order.
    pub fn gold(&self) -> Result<Vec<f64>> {
        self.segments
            .iter()
            .map(|s| average_judgements(s).map(|g| g.value))
            .collect()
    }

    fn subset(&self, suffix: &str, rows: &[usize]) -> Dataset {
        Dataset {
            name: format!("{}-{suffix}", self.name),
            segments: rows.iter().map(|&i| self.segments[i].clone()).collect(),
        }
    }
}

/// Reads a dataset from TSV (header row required) or a JSON array of records.
pub fn load_dataset(path: impl AsRef<Path>, format: Format) -> Result<Dataset> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_string();
    let segments = match format {
        Format::Tsv => read_tsv(path)?,
        Format::Json => read_json(path)?,
    };
    Dataset::new(name, segments)
}

const REQUIRED_COLUMNS: [&str; 7] = [
    "id",
    "src_lang",
    "tgt_lang",
    "source",
    "reference",
    "hypothesis",
    "judgements",
];

fn read_tsv(path: &Path) -> Result<Vec<Segment>> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let column: HashMap<&str, usize> = header.iter().enumerate().map(|(i, h)| (h, i)).collect();
    if let Some(missing) = REQUIRED_COLUMNS.iter().find(|c| !column.contains_key(*c)) {
        return Err(Error::parse(path, 1, format!("missing column `{missing}`")));
    }

    let mut segments = Vec::new();
    let mut ids = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |name: &str| -> &str {
            column
                .get(name)
                .and_then(|&i| record.get(i))
                .unwrap_or("")
        };
        let optional = |name: &str| -> Option<String> {
            let v = field(name);
            (!v.is_empty()).then(|| v.to_string())
        };
        let tags = |name: &str| -> Option<Vec<String>> {
            optional(name).map(|v| v.split_whitespace().map(str::to_string).collect())
        };
        let judgements = parse_judgements(field("judgements"))
            .map_err(|m| Error::parse(path, line, m))?;
        let seg = Segment {
            id: field("id").to_string(),
            src_lang: field("src_lang").to_string(),
            tgt_lang: field("tgt_lang").to_string(),
            source: field("source").to_string(),
            reference: optional("reference"),
            hypothesis: field("hypothesis").to_string(),
            judgements,
            pos_source: tags("pos_source"),
            pos_reference: tags("pos_reference"),
            pos_hypothesis: tags("pos_hypothesis"),
        };
        seg.validate().map_err(|m| Error::parse(path, line, m))?;
        if !ids.insert(seg.id.clone()) {
            return Err(Error::parse(
                path,
                line,
                format!("duplicate segment id `{}`", seg.id),
            ));
        }
        segments.push(seg);
    }
    Ok(segments)
}

fn parse_judgements(field: &str) -> std::result::Result<Vec<f64>, String> {
    field
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| format!("bad judgement value `{s}`"))
        })
        .collect()
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::parse(path, line, format!("{kind:?}")),
    }
}

/// PoS tags in JSON may be a list or a space-separated string.
#[derive(Deserialize)]
#[serde(untagged)]
enum Tags {
    List(Vec<String>),
    Joined(String),
}

impl Tags {
    fn into_vec(self) -> Option<Vec<String>> {
        let tags: Vec<String> = match self {
            Tags::List(v) => v,
            Tags::Joined(s) => s.split_whitespace().map(str::to_string).collect(),
        };
        (!tags.is_empty()).then_some(tags)
    }
}

#[derive(Deserialize)]
struct JsonRecord {
    id: String,
    src_lang: String,
    tgt_lang: String,
    source: String,
    #[serde(default)]
    reference: Option<String>,
    hypothesis: String,
    #[serde(default)]
    judgements: Vec<f64>,
    #[serde(default)]
    pos_source: Option<Tags>,
    #[serde(default)]
    pos_reference: Option<Tags>,
    #[serde(default)]
    pos_hypothesis: Option<Tags>,
}

fn read_json(path: &Path) -> Result<Vec<Segment>> {
    let reader = BufReader::new(File::open(path)?);
    let records: Vec<JsonRecord> = serde_json::from_reader(reader)
        .map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
    let mut ids = HashSet::new();
    let mut segments = Vec::with_capacity(records.len());
    for (n, r) in records.into_iter().enumerate() {
        let seg = Segment {
            id: r.id,
            src_lang: r.src_lang,
            tgt_lang: r.tgt_lang,
            source: r.source,
            reference: r.reference.filter(|s| !s.is_empty()),
            hypothesis: r.hypothesis,
            judgements: r.judgements,
            pos_source: r.pos_source.and_then(Tags::into_vec),
            pos_reference: r.pos_reference.and_then(Tags::into_vec),
            pos_hypothesis: r.pos_hypothesis.and_then(Tags::into_vec),
        };
        // JSON has no line per record; report the 1-based record index.
        seg.validate()
            .map_err(|m| Error::parse(path, n + 1, format!("record {}: {m}", n + 1)))?;
        if !ids.insert(seg.id.clone()) {
            return Err(Error::DuplicateId(seg.id));
        }
        segments.push(seg);
    }
    Ok(segments)
}

/// Mean of the segment's judgements.
pub fn average_judgements(segment: &Segment) -> Result<GoldScore> {
    if segment.judgements.is_empty() {
        return Err(Error::invalid(format!(
            "segment `{}` has no judgements",
            segment.id
        )));
    }
    let value = segment.judgements.iter().sum::<f64>() / segment.judgements.len() as f64;
    Ok(GoldScore {
        segment_id: segment.id.clone(),
        value,
    })
}

/// Splits row indices into (train, test) so that rows sharing a group key
/// never straddle the split.
///
/// Unique keys are collected in first-occurrence order, shuffled with
/// [`XorShift64`] seeded by `seed`, and the first `round(ratio × keys)` go
/// to train. Row order inside each side follows the input order.
pub fn split_groups<K: AsRef<str>>(
    keys: &[K],
    train_ratio: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_ratio > 0.0 && train_ratio < 1.0) {
        return Err(Error::invalid(format!(
            "train ratio {train_ratio} outside (0, 1)"
        )));
    }
    let mut unique: Vec<&str> = Vec::new();
    let mut seen = HashSet::new();
    for k in keys {
        if seen.insert(k.as_ref()) {
            unique.push(k.as_ref());
        }
    }
    if unique.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 unique source texts to split, found {}",
            unique.len()
        )));
    }
    XorShift64::new(seed).shuffle(&mut unique);
    let n_train = (train_ratio * unique.len() as f64).round() as usize;
    let train_keys: HashSet<&str> = unique[..n_train].iter().copied().collect();
    let (train, test) = (0..keys.len()).partition(|&i| train_keys.contains(keys[i].as_ref()));
    Ok((train, test))
}

/// Source-disjoint (train, test) split of a dataset.
pub fn split_by_source(dataset: &Dataset, train_ratio: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let keys: Vec<&str> = dataset.segments.iter().map(|s| s.source.as_str()).collect();
    let (train, test) = split_groups(&keys, train_ratio, seed)?;
    Ok((dataset.subset("train", &train), dataset.subset("test", &test)))
}
