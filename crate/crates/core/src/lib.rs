//! Machine-translation evaluation metrics and their regression ensemble.
//!
//! The crate scores (source, reference, hypothesis) segments with surface,
//! static-embedding and decontextualized-embedding metrics, combines the
//! scores with a trained regressor, and evaluates everything by Spearman
//! correlation against averaged human judgements.
//!
//! ```
//! use regemt::corpus::{Dataset, Segment};
//! use regemt::metrics::{Metric, MetricConfig, Mode, Resources, Scorer};
//!
//! let seg = Segment {
//!     id: "s1".into(),
//!     src_lang: "de".into(),
//!     tgt_lang: "en".into(),
//!     source: "der Hund".into(),
//!     reference: Some("the dog".into()),
//!     hypothesis: "the dog".into(),
//!     judgements: vec![90.0],
//!     pos_source: None,
//!     pos_reference: None,
//!     pos_hypothesis: None,
//! };
//! let data = Dataset::new("toy", vec![seg]).unwrap();
//! let config = MetricConfig::new(Mode::ReferenceBased, vec![Metric::Bleu]);
//! let resources = Resources::default();
//! let scorer = Scorer::new(&data, &config, &resources).unwrap();
//! let scores = scorer.score_segment(&data.segments[0]).unwrap();
//! assert_eq!(scores.values, vec![Some(1.0)]);
//! ```

pub mod corpus;
pub mod embeddings;
pub mod ensemble;
pub mod error;
pub mod evaluation;
pub mod metrics;
pub mod report;
pub mod rng;
pub mod tokenize;
pub mod vsm;

pub use error::{Error, Result};

// Book chapters double as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/tokens.md")]
    mod tokens {}
    #[doc = include_str!("../../../book/src/soft-cosine.md")]
    mod soft_cosine {}
    #[doc = include_str!("../../../book/src/movers-distance.md")]
    mod movers_distance {}
    #[doc = include_str!("../../../book/src/surface.md")]
    mod surface {}
    #[doc = include_str!("../../../book/src/ensemble.md")]
    mod ensemble {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
