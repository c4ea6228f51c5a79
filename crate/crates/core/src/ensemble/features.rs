use crate::error::{Error, Result};

/// Dense row-major `n × m` matrix of per-segment features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    names: Vec<String>,
    ids: Vec<String>,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(names: Vec<String>, ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::invalid(format!("duplicate feature name `{dup}`")));
        }
        if rows.len() != ids.len() {
            return Err(Error::DimensionMismatch {
                expected: ids.len(),
                found: rows.len(),
            });
        }
        let m = names.len();
        let mut data = Vec::with_capacity(rows.len() * m);
        for r in rows {
            if r.len() != m {
                return Err(Error::DimensionMismatch { expected: m, found: r.len() });
            }
            if let Some(v) = r.iter().find(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("non-finite feature value {v}")));
            }
            data.extend(r);
        }
        Ok(FeatureMatrix { names, ids, data })
    }

    /// Matrix with generated ids `0..n`.
    pub fn from_rows(names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        FeatureMatrix::new(names, ids, rows)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn n_rows(&self) -> usize {
        self.ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.n_cols();
        &self.data[i * m..(i + 1) * m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn column_by_name(&self, name: &str) -> Option<Vec<f64>> {
        self.names.iter().position(|n| n == name).map(|j| self.column(j))
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.n_cols());
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            names: self.names.clone(),
            ids: rows.iter().map(|&i| self.ids[i].clone()).collect(),
            data,
        }
    }

    /// Keeps the named columns, in the given order.
    pub fn select_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<FeatureMatrix> {
        let idx = names
            .iter()
            .map(|n| {
                self.names
                    .iter()
                    .position(|x| x == n.as_ref())
                    .ok_or_else(|| Error::invalid(format!("no feature named `{}`", n.as_ref())))
            })
            .collect::<Result<Vec<usize>>>()?;
        let rows = self.rows().map(|r| idx.iter().map(|&j| r[j]).collect()).collect();
        FeatureMatrix::new(
            names.iter().map(|n| n.as_ref().to_string()).collect(),
            self.ids.clone(),
            rows,
        )
    }

    /// Appends columns; `columns[k]` must have one value per row.
    pub fn with_columns(&self, names: &[String], columns: &[Vec<f64>]) -> Result<FeatureMatrix> {
        let rows = (0..self.n_rows())
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.extend(columns.iter().map(|c| c[i]));
                r
            })
            .collect();
        let mut all = self.names.clone();
        all.extend(names.iter().cloned());
        FeatureMatrix::new(all, self.ids.clone(), rows)
    }

    pub(crate) fn map_rows(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> FeatureMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for r in self.rows() {
            data.extend(f(r));
        }
        FeatureMatrix {
            names: self.names.clone(),
            ids: self.ids.clone(),
            data,
        }
    }
}
