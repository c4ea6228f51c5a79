use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::ensemble::FeatureMatrix;
use crate::error::{Error, Result};
use crate::metrics::scorer::MetricVector;
use crate::metrics::Polarity;
use crate::report::fixed6;

/// Per-segment metric scores before placeholder substitution.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    columns: Vec<String>,
    /// `None` for columns that are never unscorable.
    polarity: Vec<Option<Polarity>>,
    ids: Vec<String>,
    rows: Vec<Vec<Option<f64>>>,
}

impl ScoreTable {
    pub fn from_vectors(
        columns: Vec<String>,
        polarity: Vec<Option<Polarity>>,
        vectors: Vec<MetricVector>,
    ) -> Result<Self> {
        if polarity.len() != columns.len() {
            return Err(Error::DimensionMismatch {
                expected: columns.len(),
                found: polarity.len(),
            });
        }
        let mut ids = Vec::with_capacity(vectors.len());
        let mut rows = Vec::with_capacity(vectors.len());
        for v in vectors {
            if v.values.len() != columns.len() {
                return Err(Error::DimensionMismatch {
                    expected: columns.len(),
                    found: v.values.len(),
                });
            }
            ids.push(v.segment_id);
            rows.push(v.values);
        }
        Ok(ScoreTable {
            columns,
            polarity,
            ids,
            rows,
        })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn rows(&self) -> &[Vec<Option<f64>>] {
        &self.rows
    }

    /// `(segment_id, column)` of every unscorable cell.
    pub fn unscorable(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        for (id, row) in self.ids.iter().zip(&self.rows) {
            for (col, v) in self.columns.iter().zip(row) {
                if v.is_none() {
                    out.push((id.as_str(), col.as_str()));
                }
            }
        }
        out
    }

    /// Worst observed value of each column over `rows`: the minimum for
    /// similarities, the maximum for distances. Columns with nothing
    /// observed fall back to 0.
    pub fn placeholders(&self, rows: &[usize]) -> Vec<f64> {
        (0..self.columns.len())
            .map(|c| {
                let observed = rows.iter().filter_map(|&r| self.rows[r][c]);
                let worst = match self.polarity[c] {
                    Some(Polarity::Distance) => observed.fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v)))),
                    _ => observed.fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v)))),
                };
                worst.unwrap_or_else(|| {
                    log::warn!("no scorable train value for `{}`, placeholder 0", self.columns[c]);
                    0.0
                })
            })
            .collect()
    }

    /// Dense feature matrix with unscorable cells replaced by `placeholders`.
    pub fn fill(&self, placeholders: &[f64]) -> Result<FeatureMatrix> {
        if placeholders.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                found: placeholders.len(),
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().zip(placeholders).map(|(v, p)| v.unwrap_or(*p)).collect())
            .collect();
        FeatureMatrix::new(self.columns.clone(), self.ids.clone(), rows)
    }

    /// Appends external score columns, matched by segment id.
    pub fn join(&mut self, external: &ExternalScores) -> Result<()> {
        for c in &external.columns {
            if self.columns.contains(c) {
                return Err(Error::invalid(format!("external column `{c}` clashes with a metric")));
            }
        }
        for (id, row) in self.ids.iter().zip(self.rows.iter_mut()) {
            let values = external
                .values
                .get(id)
                .ok_or_else(|| Error::invalid(format!("external scores lack segment `{id}`")))?;
            row.extend(values.iter().copied().map(Some));
        }
        self.columns.extend(external.columns.iter().cloned());
        self.polarity.extend(external.columns.iter().map(|_| None));
        Ok(())
    }

    /// Writes `segment_id`, one column per metric (reals with 6 decimals,
    /// unscorable cells replaced by `placeholders`) and a final `unscorable`
    /// column listing the replaced metrics, comma-separated.
    pub fn write_tsv<W: Write>(&self, mut out: W, placeholders: &[f64]) -> Result<()> {
        write!(out, "segment_id")?;
        for c in &self.columns {
            write!(out, "\t{c}")?;
        }
        writeln!(out, "\tunscorable")?;
        for (id, row) in self.ids.iter().zip(&self.rows) {
            write!(out, "{id}")?;
            let mut missing = Vec::new();
            for ((v, p), c) in row.iter().zip(placeholders).zip(&self.columns) {
                if v.is_none() {
                    missing.push(c.as_str());
                }
                write!(out, "\t{}", fixed6(v.unwrap_or(*p)))?;
            }
            writeln!(out, "\t{}", missing.join(","))?;
        }
        Ok(())
    }
}

/// Precomputed scores from tools outside this crate, keyed by segment id.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalScores {
    pub columns: Vec<String>,
    pub values: HashMap<String, Vec<f64>>,
}

/// Reads a TSV with a `segment_id` column followed by numeric columns.
pub fn load_external_scores(path: impl AsRef<Path>) -> Result<ExternalScores> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty external-scores file"))?;
    let mut cols = header.split('\t');
    if cols.next() != Some("segment_id") {
        return Err(Error::parse(path, 1, "first column must be `segment_id`"));
    }
    let columns: Vec<String> = cols.map(str::to_string).collect();
    let mut values = HashMap::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let id = fields.next().unwrap_or_default().to_string();
        let row = fields
            .map(|f| f.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| Error::parse(path, i + 1, "non-numeric score"))?;
        if row.len() != columns.len() {
            return Err(Error::parse(
                path,
                i + 1,
                format!("expected {} scores, found {}", columns.len(), row.len()),
            ));
        }
        if values.insert(id.clone(), row).is_some() {
            return Err(Error::parse(path, i + 1, format!("duplicate segment id `{id}`")));
        }
    }
    Ok(ExternalScores { columns, values })
}
