//! The two second-pass pipelines, score fusion and the loss diagnostics.
//!
//! P1 asks the model to correct each N-best list and rescores the result with
//! an n-gram model; P2 asks the model to score or pick a hypothesis directly.

mod fusion;
mod loss;
mod run;

pub use fusion::{fuse, select_fused, FusionConfig};
pub use loss::{
    expected_wer, first_pass_posterior, h2t_loss, h2t_loss_from, FixedProbabilities, H2TConfig, LossError,
    NgramConditional, SequenceProbability,
};
pub use run::{activate_tap, run_ngram, run_p1, run_p2, CorrectionMode, P1Config, P2Config};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::nbest::{WerError, WerReport};
use crate::ngram::ScoreError;
use crate::prompt::PromptError;
use crate::response::ParserStats;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    /// Rank in the candidate list the run chose from. For corrected lists this
    /// can be past the original N.
    pub rank: usize,
    pub text: String,
    /// The chosen text came from the model's correction rather than the first pass.
    #[serde(default)]
    pub corrected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub name: String,
    /// Effective configuration, for provenance.
    pub config: BTreeMap<String, serde_json::Value>,
    pub selections: BTreeMap<String, Selection>,
    /// Scoring against references; absent when any utterance lacks one.
    pub wer_report: Option<WerReport>,
    pub first_pass_wer: Option<f64>,
    /// Oracle WER of the lists the run chose from.
    pub oracle_wer: Option<f64>,
    pub parser_stats: ParserStats,
    /// Requests that failed outright; each is also counted as a fallback.
    pub backend_errors: usize,
    pub llm_call_count: usize,
    /// Raw response bodies keyed by request tag. Not serialized.
    #[serde(skip)]
    pub raw_payloads: BTreeMap<String, Vec<u8>>,
}

impl RunResult {
    pub fn corpus_wer(&self) -> Option<f64> {
        self.wer_report.as_ref().map(|r| r.corpus_wer)
    }

    /// Stable, pretty-printed JSON.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("run results serialize");
        s.push('\n');
        s
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Wer(#[from] WerError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("{0}")]
    Config(String),
    #[error("task-activating dialog failed: {0}")]
    Activation(crate::llm::LlmError),
}
