//! Whitespace and WordPiece tokenization.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};

/// Whitespace tokens longer than this many characters become the unknown token.
pub const MAX_CHARS_PER_WORD: usize = 100;

pub const DEFAULT_UNK: &str = "[UNK]";

/// Splits on Unicode whitespace and drops empty tokens.
pub fn whitespace_tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

/// Subword inventory for greedy longest-match-first segmentation.
///
/// Continuation pieces carry a `##` prefix, e.g. `un`, `##aff`, `##able`.
#[derive(Debug, Clone)]
pub struct WordPieceVocab {
    entries: Vec<String>,
    lookup: HashSet<String>,
    unk_token: String,
    lowercase: bool,
}

impl WordPieceVocab {
    pub fn new<I, S>(entries: I, unk_token: &str) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let entries: Vec<String> = entries.into_iter().map(Into::into).collect();
        if entries.is_empty() {
            return Err(Error::invalid("empty WordPiece vocabulary"));
        }
        let lookup: HashSet<String> = entries.iter().cloned().collect();
        if !lookup.contains(unk_token) {
            return Err(Error::invalid(format!(
                "unknown token `{unk_token}` missing from WordPiece vocabulary"
            )));
        }
        Ok(WordPieceVocab {
            entries,
            lookup,
            unk_token: unk_token.to_string(),
            lowercase: false,
        })
    }

    /// Reads one subword per line; line order defines entry order.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let entries = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .filter(|l| !l.is_empty())
            .map(str::to_string);
        WordPieceVocab::new(entries, DEFAULT_UNK)
    }

    /// Lowercase input before matching. Off by default.
    pub fn with_lowercase(mut self, lowercase: bool) -> Self {
        self.lowercase = lowercase;
        self
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn unk_token(&self) -> &str {
        &self.unk_token
    }

    pub fn contains(&self, piece: &str) -> bool {
        self.lookup.contains(piece)
    }

    fn split_word(&self, word: &str, out: &mut Vec<String>) {
        let chars: Vec<(usize, char)> = word.char_indices().collect();
        if chars.len() > MAX_CHARS_PER_WORD {
            out.push(self.unk_token.clone());
            return;
        }
        let boundary = |i: usize| chars.get(i).map_or(word.len(), |&(b, _)| b);
        let mut pieces = Vec::new();
        let mut start = 0;
        while start < chars.len() {
            let mut end = chars.len();
            let mut found = None;
            while end > start {
                let sub = &word[boundary(start)..boundary(end)];
                let candidate = if start > 0 {
                    format!("##{sub}")
                } else {
                    sub.to_string()
                };
                if self.lookup.contains(&candidate) {
                    found = Some(candidate);
                    break;
                }
                end -= 1;
            }
            match found {
                Some(piece) => {
                    pieces.push(piece);
                    start = end;
                }
                None => {
                    out.push(self.unk_token.clone());
                    return;
                }
            }
        }
        out.extend(pieces);
    }
}

/// Greedy longest-match-first WordPiece segmentation of every whitespace token.
pub fn wordpiece_tokenize(text: &str, vocab: &WordPieceVocab) -> Vec<String> {
    let mut out = Vec::new();
    let lowered;
    let text = if vocab.lowercase {
        lowered = text.to_lowercase();
        lowered.as_str()
    } else {
        text
    };
    for word in whitespace_tokenize(text) {
        vocab.split_word(word, &mut out);
    }
    out
}
