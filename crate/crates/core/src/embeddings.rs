//! Token vector tables.
//!
//! Static vectors come from word-vector text files. Contextual vectors are
//! ingested per token occurrence and can be collapsed into a static table by
//! averaging all occurrences of each token string ([`decontextualize`]).

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::corpus::Side;
use crate::error::{Error, Result};

/// Token → vector lookup with a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    table: HashMap<String, Vec<f64>>,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("embedding dimension must be positive"));
        }
        Ok(EmbeddingStore {
            dim,
            table: HashMap::new(),
        })
    }

    /// Inserts or replaces a vector. Returns the previous vector, if any.
    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f64>) -> Result<Option<Vec<f64>>> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        Ok(self.table.insert(token.into(), vector))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.table.get(token).map(Vec::as_slice)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.table.contains_key(token)
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.table.keys().map(String::as_str)
    }

    /// Multiplies every vector by `factor`.
    pub fn scaled(&self, factor: f64) -> EmbeddingStore {
        EmbeddingStore {
            dim: self.dim,
            table: self
                .table
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().map(|x| x * factor).collect()))
                .collect(),
        }
    }
}

/// Loads the word-vector text format: a `<count> <dim>` header followed by
/// one `<token> v1 … v_dim` line per token. Later duplicates win.
pub fn load_static(path: impl AsRef<Path>) -> Result<EmbeddingStore> {
    let path = path.as_ref();
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty vector file"))??;
    let mut fields = header.split_whitespace();
    let (count, dim) = match (fields.next(), fields.next(), fields.next()) {
        (Some(c), Some(d), None) => (
            c.parse::<usize>()
                .map_err(|_| Error::parse(path, 1, format!("bad count `{c}`")))?,
            d.parse::<usize>()
                .map_err(|_| Error::parse(path, 1, format!("bad dimension `{d}`")))?,
        ),
        _ => return Err(Error::parse(path, 1, "header must be `<count> <dim>`")),
    };
    let mut store = EmbeddingStore::new(dim).map_err(|e| Error::parse(path, 1, e.to_string()))?;
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        let line = line?;
        let line_no = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.trim_end().split(' ');
        let token = parts.next().unwrap_or_default();
        let vector = parts
            .filter(|p| !p.is_empty())
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::parse(path, line_no, format!("bad value `{v}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if vector.len() != dim {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected {dim} values, found {}", vector.len()),
            ));
        }
        if store.insert(token, vector)?.is_some() {
            log::warn!("{}:{line_no}: duplicate token `{token}` overrides earlier vector", path.display());
        }
        rows += 1;
    }
    if rows != count {
        log::warn!("{}: header declares {count} vectors, read {rows}", path.display());
    }
    Ok(store)
}

/// One contextual vector of one token occurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextualRecord {
    pub segment_id: String,
    pub side: Side,
    pub token_index: usize,
    pub token: String,
    pub vector: Vec<f64>,
}

/// Reads the contextual-record TSV: header `segment_id side token_index token
/// vector`, vector components space-separated.
pub fn load_contextual(path: impl AsRef<Path>) -> Result<Vec<ContextualRecord>> {
    let path = path.as_ref();
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut records = Vec::new();
    let mut keys = HashSet::new();
    let mut dim = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if i == 0 {
            if !line.starts_with("segment_id") {
                return Err(Error::parse(path, 1, "missing header row"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 5 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 5 columns, found {}", cols.len()),
            ));
        }
        let side: Side = cols[1]
            .parse()
            .map_err(|e: Error| Error::parse(path, line_no, e.to_string()))?;
        let token_index = cols[2]
            .parse::<usize>()
            .map_err(|_| Error::parse(path, line_no, format!("bad token index `{}`", cols[2])))?;
        let vector = cols[4]
            .split_whitespace()
            .map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| Error::parse(path, line_no, "non-numeric or non-finite vector value"))?;
        match dim {
            None if vector.is_empty() => return Err(Error::parse(path, line_no, "empty vector")),
            None => dim = Some(vector.len()),
            Some(d) if d != vector.len() => {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("expected {d} values, found {}", vector.len()),
                ))
            }
            _ => {}
        }
        if !keys.insert((cols[0].to_string(), side, token_index)) {
            return Err(Error::parse(path, line_no, "duplicate (segment_id, side, token_index)"));
        }
        records.push(ContextualRecord {
            segment_id: cols[0].to_string(),
            side,
            token_index,
            token: cols[3].to_string(),
            vector,
        });
    }
    Ok(records)
}

/// Averages all occurrence vectors of each token string into a static table.
pub fn decontextualize(records: &[ContextualRecord]) -> Result<EmbeddingStore> {
    let first = records
        .first()
        .ok_or_else(|| Error::invalid("no contextual records to decontextualize"))?;
    let dim = first.vector.len();
    let mut sums: HashMap<&str, (Vec<f64>, usize)> = HashMap::new();
    for r in records {
        if r.vector.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: r.vector.len(),
            });
        }
        let (sum, count) = sums
            .entry(r.token.as_str())
            .or_insert_with(|| (vec![0.0; dim], 0));
        for (s, v) in sum.iter_mut().zip(&r.vector) {
            *s += v;
        }
        *count += 1;
    }
    let mut store = EmbeddingStore::new(dim)?;
    for (token, (sum, count)) in sums {
        let n = count as f64;
        store.insert(token, sum.into_iter().map(|s| s / n).collect())?;
    }
    Ok(store)
}

/// Cosine similarity; zero vectors have similarity 0 to everything.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    Ok(cosine_unchecked(u, v))
}

pub(crate) fn cosine_unchecked(u: &[f64], v: &[f64]) -> f64 {
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    dot / (nu.sqrt() * nv.sqrt())
}

pub(crate) fn euclidean(u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}
