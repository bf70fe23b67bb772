//! Hypotheses, N-best lists and the WER machinery everything else is scored with.

mod align;
mod jsonl;
mod normalize;
mod wer;

pub use align::{align, edit_errors, AlignmentResult};
pub use jsonl::{parse_record, read_jsonl, write_jsonl, FormatError};
pub use normalize::{normalize, NormConfig};
pub use wer::{corpus_wer, oracle_select, oracle_wer, utterance_wer, UtteranceWer, WerError, WerReport};

use serde::{Deserialize, Serialize};

/// One candidate transcription out of a first-pass decoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    /// Normalized words.
    pub words: Vec<String>,
    /// First-pass log probability, natural log.
    pub score: f64,
    /// 1-based position in the list.
    pub rank: usize,
}

impl Hypothesis {
    pub fn text(&self) -> String {
        self.words.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ListError {
    #[error("utterance {0}: empty hypothesis list")]
    Empty(String),
    #[error("utterance {id}: expected rank {expected}, found {found}")]
    BadRank { id: String, expected: usize, found: usize },
    #[error("utterance {0}: hypothesis contains an empty or padded token")]
    BadToken(String),
}

/// All candidates for a single utterance, sorted by rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NBestList {
    pub utterance_id: String,
    pub hypotheses: Vec<Hypothesis>,
    pub reference: Option<Vec<String>>,
}

impl NBestList {
    /// Builds a list from `(words, score)` pairs in rank order.
    pub fn new(
        utterance_id: impl Into<String>,
        hypotheses: impl IntoIterator<Item = (Vec<String>, f64)>,
        reference: Option<Vec<String>>,
    ) -> Result<Self, ListError> {
        let list = NBestList {
            utterance_id: utterance_id.into(),
            hypotheses: hypotheses
                .into_iter()
                .enumerate()
                .map(|(i, (words, score))| Hypothesis { words, score, rank: i + 1 })
                .collect(),
            reference,
        };
        list.validate()?;
        Ok(list)
    }

    /// Convenience constructor from raw strings, normalized with the default policy.
    pub fn from_texts(
        utterance_id: impl Into<String>,
        hypotheses: &[(&str, f64)],
        reference: Option<&str>,
    ) -> Result<Self, ListError> {
        let cfg = NormConfig::default();
        Self::new(
            utterance_id,
            hypotheses.iter().map(|(t, s)| (normalize(t, &cfg), *s)),
            reference.map(|r| normalize(r, &cfg)),
        )
    }

    pub fn validate(&self) -> Result<(), ListError> {
        if self.hypotheses.is_empty() {
            return Err(ListError::Empty(self.utterance_id.clone()));
        }
        for (i, h) in self.hypotheses.iter().enumerate() {
            if h.rank != i + 1 {
                return Err(ListError::BadRank {
                    id: self.utterance_id.clone(),
                    expected: i + 1,
                    found: h.rank,
                });
            }
            if h.words.iter().any(|w| w.is_empty() || w.trim() != w) {
                return Err(ListError::BadToken(self.utterance_id.clone()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    /// Hypothesis at a 1-based rank.
    pub fn get(&self, rank: usize) -> Option<&Hypothesis> {
        rank.checked_sub(1).and_then(|i| self.hypotheses.get(i))
    }

    /// Appends a candidate as rank N+1.
    pub fn push(&mut self, words: Vec<String>, score: f64) -> usize {
        let rank = self.hypotheses.len() + 1;
        self.hypotheses.push(Hypothesis { words, score, rank });
        rank
    }
}
