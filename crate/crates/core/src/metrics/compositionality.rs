//! Part-of-speech transition graphs and the Compositionality distance.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Row-normalized PoS transition counts. Rows without outgoing transitions
/// stay all-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    tags: Vec<String>,
    probs: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    fn position(&self, tag: &str) -> Option<usize> {
        self.tags.binary_search_by(|t| t.as_str().cmp(tag)).ok()
    }

    /// Transition probability `from → to`; zero for unseen tags.
    pub fn prob(&self, from: &str, to: &str) -> f64 {
        match (self.position(from), self.position(to)) {
            (Some(i), Some(j)) => self.probs[i][j],
            _ => 0.0,
        }
    }
}

/// Counts adjacent tag pairs and normalizes each row by its sum.
pub fn transition_graph<S: AsRef<str>>(pos_tags: &[S]) -> Result<TransitionMatrix> {
    if pos_tags.is_empty() {
        return Err(Error::invalid("cannot build a transition graph from zero tags"));
    }
    let tags: Vec<String> = pos_tags
        .iter()
        .map(|t| t.as_ref().to_string())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let pos = |t: &str| tags.binary_search_by(|x| x.as_str().cmp(t)).unwrap();
    let k = tags.len();
    let mut probs = vec![vec![0.0; k]; k];
    for pair in pos_tags.windows(2) {
        probs[pos(pair[0].as_ref())][pos(pair[1].as_ref())] += 1.0;
    }
    for row in &mut probs {
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            row.iter_mut().for_each(|p| *p /= total);
        }
    }
    Ok(TransitionMatrix { tags, probs })
}

/// `Σ_i |x(i,i) − y(i,i)|` over the union of tags. With `full_matrix` the
/// sum runs over every `(i, j)` cell instead of the diagonal.
pub fn compositionality(x: &TransitionMatrix, y: &TransitionMatrix, full_matrix: bool) -> f64 {
    let union: BTreeSet<&str> = x
        .tags
        .iter()
        .chain(&y.tags)
        .map(String::as_str)
        .collect();
    let mut total = 0.0;
    for &a in &union {
        if full_matrix {
            for &b in &union {
                total += (x.prob(a, b) - y.prob(a, b)).abs();
            }
        } else {
            total += (x.prob(a, a) - y.prob(a, a)).abs();
        }
    }
    total
}
