//! Surface-length features for the Reg-base regressor.

use crate::corpus::Segment;
use crate::error::{Error, Result};
use crate::metrics::Mode;
use crate::tokenize::{wordpiece_tokenize, WordPieceVocab};

/// `[chars(x), chars(hyp), pieces(x), pieces(hyp)]` where `x` is the
/// reference in reference-based mode and the source otherwise. Characters
/// are Unicode scalar values of the raw text; pieces are WordPiece tokens.
pub fn reg_base_features(segment: &Segment, vocab: &WordPieceVocab, mode: Mode) -> Result<[f64; 4]> {
    let x = match mode {
        Mode::ReferenceBased => segment.reference.as_deref().ok_or_else(|| {
            Error::invalid(format!("segment `{}` has no reference", segment.id))
        })?,
        Mode::SourceBased => segment.source.as_str(),
    };
    let hyp = segment.hypothesis.as_str();
    Ok([
        x.chars().count() as f64,
        hyp.chars().count() as f64,
        wordpiece_tokenize(x, vocab).len() as f64,
        wordpiece_tokenize(hyp, vocab).len() as f64,
    ])
}
