use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "nbest", version, about = "Second-pass rescoring and correction of ASR N-best lists")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// First-pass and oracle WER of an N-best file.
    Wer {
        input: PathBuf,
    },
    /// Rescore with an ARPA n-gram model under shallow fusion.
    RescoreNgram(RescoreArgs),
    /// P1: ask the model to correct each list, then rescore with an n-gram model.
    Correct(LlmArgs),
    /// P2: ask the model to score or pick hypotheses directly.
    Icl(LlmArgs),
    /// Generate a synthetic N-best corpus from reference sentences.
    Synth(SynthArgs),
    /// Tabulate corpus WERs of run artifacts against the first one.
    Report {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct RescoreArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub arpa: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Ignore first-pass scores.
    #[arg(long)]
    pub no_acoustic: bool,
    #[arg(long)]
    pub name: Option<String>,
    /// Run artifact path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// One reference sentence per line.
    #[arg(long)]
    pub refs: PathBuf,
    /// Channel configuration JSON.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// N-best JSON Lines output (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Manifest path; defaults to `<out>.manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyName {
    Zero,
    ZeroCot,
    DomainHint,
    OneShot,
    FewShot,
    Tap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskName {
    Scores,
    Selection,
    Correction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HistoryName {
    OneByOne,
    Accumulate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Augment,
    Replace,
}

/// Options shared by `correct` and `icl`. Every option left unset falls back
/// to `--config`, then to the environment, then to the default.
#[derive(Debug, Args)]
pub struct LlmArgs {
    /// N-best JSON Lines input.
    pub input: Option<PathBuf>,
    /// A run configuration, or a run artifact whose configuration is reused.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyName>,
    #[arg(long, value_enum)]
    pub task: Option<TaskName>,
    /// `http`, or `mock:echo`, `mock:rank:K`, `mock:oracle-scores`, `mock:random-scores`, `mock:scripted`.
    #[arg(long)]
    pub backend: Option<String>,
    /// JSON object of request tag to reply, for `mock:scripted`.
    #[arg(long)]
    pub script: Option<PathBuf>,
    /// Base URL of the chat-completions server (env: LLM_ENDPOINT).
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, value_enum)]
    pub history: Option<HistoryName>,
    /// Demonstrations for few-shot prompting.
    #[arg(long)]
    pub shots: Option<usize>,
    /// N-best JSON Lines pool the demonstrations are drawn from.
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub domain: Option<String>,
    /// Append the step-by-step cue to every task query.
    #[arg(long)]
    pub reasoning: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Weight of the model scores (P2) or of the n-gram scores (P1).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub no_acoustic: bool,
    /// n-gram model for the rescoring step of `correct`.
    #[arg(long)]
    pub arpa: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeName>,
    #[arg(long)]
    pub max_in_flight: Option<usize>,
    #[arg(long)]
    pub max_attempts: Option<u32>,
    /// Per-request timeout in seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
    #[arg(long)]
    pub max_fallback_rate: Option<f64>,
    /// Ask the backend for the task-activating replies instead of replaying them.
    #[arg(long)]
    pub tap_live: bool,
    #[arg(long)]
    pub name: Option<String>,
    /// Write every raw response body to DIR/<tag>.json.
    #[arg(long, value_name = "DIR", num_args = 0..=1, default_missing_value = "raw")]
    pub dump_raw: Option<PathBuf>,
    /// Run artifact path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}
