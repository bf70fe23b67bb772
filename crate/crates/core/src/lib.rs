//! Second-pass processing of ASR N-best lists with large language models.
//!
//! Two pipelines are provided: LLM error correction followed by n-gram
//! rescoring ([`pipeline::run_p1`]), and direct prompt-driven rescoring or
//! selection ([`pipeline::run_p2`]). Everything is scored with word error
//! rate against references, and can run fully offline through the mock
//! backend and the synthetic N-best generator.

pub mod llm;
pub mod nbest;
pub mod ngram;
pub mod pipeline;
pub mod prompt;
pub mod response;
pub mod synth;
mod util;

pub use nbest::{Hypothesis, NBestList};
