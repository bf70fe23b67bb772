//! Backoff n-gram language models read from ARPA text.

mod arpa;
mod rescore;

pub use arpa::{load_arpa, ArpaError};
pub use rescore::{ngram_rescore, ngram_scores_ln};

use std::collections::HashMap;
use std::io::{self, Write};

/// Natural-log value of one log10 unit.
pub const LN_10: f64 = std::f64::consts::LN_10;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OovPolicy {
    /// Fail with the list of unknown words.
    #[default]
    Error,
    /// Score unknown words as `<unk>` when the model has it.
    MapToUnk,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoreError {
    #[error("out-of-vocabulary words: {}", .0.join(", "))]
    Oov(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub log10_prob: f64,
    pub log10_backoff: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct OrderTable {
    // File order is kept so that writing a model reproduces its layout.
    pub(crate) keys: Vec<Box<[u32]>>,
    pub(crate) entries: Vec<Entry>,
    pub(crate) index: HashMap<Box<[u32]>, usize>,
}

impl OrderTable {
    fn get(&self, key: &[u32]) -> Option<&Entry> {
        self.index.get(key).map(|&i| &self.entries[i])
    }

    pub(crate) fn len(&self) -> usize {
        self.entries.len()
    }
}

/// Immutable backoff model. Scores are log10 as stored in the file.
#[derive(Debug, Clone)]
pub struct NgramModel {
    pub(crate) vocab: Vec<String>,
    pub(crate) word_ids: HashMap<String, u32>,
    pub(crate) tables: Vec<OrderTable>,
    pub(crate) oov: OovPolicy,
}

impl NgramModel {
    pub fn max_order(&self) -> usize {
        self.tables.len()
    }

    pub fn with_oov_policy(mut self, oov: OovPolicy) -> Self {
        self.oov = oov;
        self
    }

    pub fn oov_policy(&self) -> OovPolicy {
        self.oov
    }

    pub fn vocab(&self) -> impl Iterator<Item = &str> {
        self.vocab.iter().map(String::as_str)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.word_ids.contains_key(word)
    }

    /// Number of stored n-grams of the given order.
    pub fn count(&self, order: usize) -> usize {
        order
            .checked_sub(1)
            .and_then(|i| self.tables.get(i))
            .map_or(0, OrderTable::len)
    }

    /// Stored entry for an n-gram, if any.
    pub fn entry<S: AsRef<str>>(&self, words: &[S]) -> Option<Entry> {
        if words.is_empty() || words.len() > self.max_order() {
            return None;
        }
        let ids: Option<Vec<u32>> = words.iter().map(|w| self.word_ids.get(w.as_ref()).copied()).collect();
        self.tables[words.len() - 1].get(&ids?).copied()
    }

    fn resolve<S: AsRef<str>>(&self, words: &[S]) -> Result<Vec<u32>, ScoreError> {
        let unk = match self.oov {
            OovPolicy::MapToUnk => self.word_ids.get(UNK).copied(),
            OovPolicy::Error => None,
        };
        let mut ids = Vec::with_capacity(words.len());
        let mut missing = Vec::new();
        for w in words {
            match self.word_ids.get(w.as_ref()).copied().or(unk) {
                Some(id) => ids.push(id),
                None => missing.push(w.as_ref().to_string()),
            }
        }
        if missing.is_empty() {
            Ok(ids)
        } else {
            Err(ScoreError::Oov(missing))
        }
    }

    // log10 P(word | context) with standard backoff; an unstored history has weight 1.
    fn conditional_ids(&self, context: &[u32], word: u32) -> f64 {
        let keep = context.len().min(self.max_order() - 1);
        let mut ctx = &context[context.len() - keep..];
        let mut backoff = 0.0;
        let mut key = Vec::with_capacity(ctx.len() + 1);
        loop {
            key.clear();
            key.extend_from_slice(ctx);
            key.push(word);
            if let Some(e) = self.tables[ctx.len()].get(&key) {
                return backoff + e.log10_prob;
            }
            if ctx.is_empty() {
                // Every vocabulary word has a unigram entry, so this is unreachable
                // for resolved ids.
                return backoff + f64::NEG_INFINITY;
            }
            backoff += self.tables[ctx.len() - 1]
                .get(ctx)
                .and_then(|e| e.log10_backoff)
                .unwrap_or(0.0);
            ctx = &ctx[1..];
        }
    }

    /// log10 P(word | history).
    pub fn conditional_log10<S: AsRef<str>>(&self, history: &[S], word: &str) -> Result<f64, ScoreError> {
        let ctx = self.resolve(history)?;
        let w = self.resolve(&[word])?[0];
        Ok(self.conditional_ids(&ctx, w))
    }

    /// Total log10 probability of a word sequence. With markers, `<s>` is
    /// used as initial context only and `</s>` is scored at the end; a marker
    /// the model does not know is left out.
    pub fn score_sequence<S: AsRef<str>>(&self, words: &[S], add_markers: bool) -> Result<f64, ScoreError> {
        let mut ids = self.resolve(words)?;
        let mut start = 0;
        if add_markers {
            if let Some(&bos) = self.word_ids.get(BOS) {
                ids.insert(0, bos);
                start = 1;
            }
            if let Some(&eos) = self.word_ids.get(EOS) {
                ids.push(eos);
            }
        }
        Ok((start..ids.len()).map(|i| self.conditional_ids(&ids[..i], ids[i])).sum())
    }

    /// log10 probability of `words` continuing `history`, without markers.
    pub fn score_continuation<S: AsRef<str>, T: AsRef<str>>(
        &self,
        history: &[S],
        words: &[T],
    ) -> Result<f64, ScoreError> {
        let mut ids = self.resolve(history)?;
        let start = ids.len();
        ids.extend(self.resolve(words)?);
        Ok((start..ids.len()).map(|i| self.conditional_ids(&ids[..i], ids[i])).sum())
    }

    /// Natural-log sequence score, the unit used by fusion.
    pub fn score_ln<S: AsRef<str>>(&self, words: &[S], add_markers: bool) -> Result<f64, ScoreError> {
        self.score_sequence(words, add_markers).map(|s| s * LN_10)
    }

    /// Writes the model back out as ARPA text.
    pub fn write_arpa<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "\\data\\")?;
        for (i, t) in self.tables.iter().enumerate() {
            writeln!(w, "ngram {}={}", i + 1, t.len())?;
        }
        for (i, t) in self.tables.iter().enumerate() {
            writeln!(w)?;
            writeln!(w, "\\{}-grams:", i + 1)?;
            for (key, e) in t.keys.iter().zip(&t.entries) {
                let words: Vec<&str> = key.iter().map(|&id| self.vocab[id as usize].as_str()).collect();
                write!(w, "{}\t{}", e.log10_prob, words.join(" "))?;
                if let Some(b) = e.log10_backoff {
                    write!(w, "\t{b}")?;
                }
                writeln!(w)?;
            }
        }
        writeln!(w)?;
        writeln!(w, "\\end\\")
    }
}
