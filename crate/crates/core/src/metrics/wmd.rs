//! Word Mover's Distance over static or per-occurrence embeddings.

use crate::embeddings::{euclidean, ContextualRecord, EmbeddingStore};
use crate::error::{Error, Result};
use crate::metrics::flow::{transport, FlowSolution};
use crate::metrics::Weighting;
use crate::vsm::{Vocabulary, WeightedBow};

/// Transport cost between two weighted point clouds after ℓ1 normalization.
/// Cost between points is their Euclidean distance.
pub fn weighted_transport(x: &[(&[f64], f64)], y: &[(&[f64], f64)]) -> Result<FlowSolution> {
    let sx: f64 = x.iter().map(|p| p.1).sum();
    let sy: f64 = y.iter().map(|p| p.1).sum();
    if sx.is_nan() || sy.is_nan() || sx <= 0.0 || sy <= 0.0 {
        return Err(Error::Unscorable("a side has no mass to transport".into()));
    }
    let supply: Vec<f64> = x.iter().map(|p| p.1 / sx).collect();
    let demand: Vec<f64> = y.iter().map(|p| p.1 / sy).collect();
    let mut cost = Vec::with_capacity(x.len() * y.len());
    for (u, _) in x {
        for (v, _) in y {
            cost.push(euclidean(u, v));
        }
    }
    transport(&supply, &demand, &cost)
}

/// WMD between two bags of words. Terms without an embedding, or with zero
/// weight, are dropped first; if a side ends up empty the segment is
/// unscorable.
pub fn wmd(x: &WeightedBow, y: &WeightedBow, vocab: &Vocabulary, store: &EmbeddingStore) -> Result<f64> {
    let points = |bow: &WeightedBow| -> Vec<(&[f64], f64)> {
        bow.entries()
            .iter()
            .filter(|(_, &w)| w > 0.0)
            .filter_map(|(&i, &w)| store.get(vocab.term(i)).map(|v| (v, w)))
            .collect()
    };
    let (px, py) = (points(x), points(y));
    if px.is_empty() || py.is_empty() {
        return Err(Error::Unscorable(
            "no embedded terms with positive weight on one side".into(),
        ));
    }
    Ok(weighted_transport(&px, &py)?.cost)
}

/// WMD where every token occurrence is its own node. Occurrence weight is 1
/// (`nnx`) or the idf of its token string (`nfx`).
pub fn wmd_contextual(
    records_x: &[&ContextualRecord],
    records_y: &[&ContextualRecord],
    weighting: Weighting,
    vocab: &Vocabulary,
) -> Result<f64> {
    if records_x.is_empty() || records_y.is_empty() {
        return Err(Error::Unscorable("no contextual records on one side".into()));
    }
    let weight = |r: &ContextualRecord| match weighting {
        Weighting::Nnx => 1.0,
        Weighting::Nfx => vocab.idf(&r.token),
    };
    fn points<'r>(rs: &[&'r ContextualRecord], weight: impl Fn(&ContextualRecord) -> f64) -> Vec<(&'r [f64], f64)> {
        rs.iter()
            .map(|r| (r.vector.as_slice(), weight(r)))
            .filter(|p| p.1 > 0.0)
            .collect()
    }
    let (px, py) = (points(records_x, weight), points(records_y, weight));
    if px.is_empty() || py.is_empty() {
        return Err(Error::Unscorable("all occurrence weights are zero on one side".into()));
    }
    Ok(weighted_transport(&px, &py)?.cost)
}
