//! Structured readings of free-text model replies.
//!
//! Every parser is total: it returns either a [`ParsedLlmOutput`] or a
//! [`Fallback`], never panics, and treats CRLF and LF identically.

mod correction;
mod scores;
mod selection;

pub use correction::{parse_correction, META_VOCABULARY};
pub use scores::parse_scores;
pub use selection::{parse_selection, SELECTION_VOCABULARY};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum OutputKind {
    Correction(Vec<String>),
    Scores(Vec<f64>),
    /// 1-based rank.
    Selection(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    /// The primary grammar rule matched.
    Clean,
    /// A lower-priority rule matched, or the reply needed repair.
    Recovered,
    /// Nothing usable; the caller substitutes the first-pass top hypothesis.
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedLlmOutput {
    #[serde(flatten)]
    pub kind: OutputKind,
    pub confidence: Confidence,
}

impl ParsedLlmOutput {
    fn clean(kind: OutputKind) -> Self {
        ParsedLlmOutput { kind, confidence: Confidence::Clean }
    }

    fn recovered(kind: OutputKind) -> Self {
        ParsedLlmOutput { kind, confidence: Confidence::Recovered }
    }
}

/// No rule matched.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fallback {
    pub reason: String,
}

impl Fallback {
    fn new(reason: impl Into<String>) -> Self {
        Fallback { reason: reason.into() }
    }
}

pub type ParseOutcome = Result<ParsedLlmOutput, Fallback>;

/// Counts of how replies were interpreted over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParserStats {
    pub clean: usize,
    pub recovered: usize,
    pub fallback: usize,
}

impl ParserStats {
    pub fn record(&mut self, confidence: Confidence) {
        match confidence {
            Confidence::Clean => self.clean += 1,
            Confidence::Recovered => self.recovered += 1,
            Confidence::Fallback => self.fallback += 1,
        }
    }

    pub fn record_outcome(&mut self, outcome: &ParseOutcome) {
        self.record(outcome.as_ref().map_or(Confidence::Fallback, |p| p.confidence));
    }

    pub fn total(&self) -> usize {
        self.clean + self.recovered + self.fallback
    }

    pub fn fallback_rate(&self) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            self.fallback as f64 / self.total() as f64
        }
    }
}

/// LF-only copy of the reply.
pub(crate) fn normalize_newlines(text: &str) -> String {
    text.replace("\r\n", "\n").replace('\r', "\n")
}
