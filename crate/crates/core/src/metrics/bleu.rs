//! Smoothed sentence-level BLEU.

use std::collections::HashMap;

/// Geometric mean of clipped n-gram precisions for `n = 1..=max_n`, times
/// the brevity penalty `min(1, exp(1 − r/h))`.
///
/// Precisions for `n ≥ 2` use add-one smoothing, `(matches + 1) / (total + 1)`.
/// The unigram precision is unsmoothed, so no shared token means 0.
pub fn sentence_bleu<S: AsRef<str>>(reference: &[S], hypothesis: &[S], max_n: usize) -> f64 {
    assert!(max_n >= 1, "max_n must be at least 1");
    if hypothesis.is_empty() {
        return 0.0;
    }
    let reference: Vec<&str> = reference.iter().map(AsRef::as_ref).collect();
    let hypothesis: Vec<&str> = hypothesis.iter().map(AsRef::as_ref).collect();

    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let ref_counts = ngram_counts(&reference, n);
        let hyp_counts = ngram_counts(&hypothesis, n);
        let total: usize = hyp_counts.values().sum();
        let matches: usize = hyp_counts
            .iter()
            .map(|(g, &c)| c.min(ref_counts.get(g).copied().unwrap_or(0)))
            .sum();
        let precision = if n == 1 {
            matches as f64 / total as f64
        } else {
            (matches as f64 + 1.0) / (total as f64 + 1.0)
        };
        if precision == 0.0 {
            return 0.0;
        }
        log_sum += precision.ln();
    }
    let (r, h) = (reference.len() as f64, hypothesis.len() as f64);
    let brevity = if h >= r { 1.0 } else { (1.0 - r / h).exp() };
    brevity * (log_sum / max_n as f64).exp()
}

fn ngram_counts<'a>(tokens: &'a [&'a str], n: usize) -> HashMap<&'a [&'a str], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}
