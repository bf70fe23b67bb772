//! Prompting strategies rendered into role-tagged chat turns.

mod render;
mod template;
mod templates;

pub use render::{
    advance_history, check_disjoint, nbest_block, render, render_tap, select_demonstrations, tap_activation,
    ConversationState,
};
pub use template::{Placeholder, Template, TemplateError, Values};
pub use templates::{TemplateSet, TEMPLATE_VERSION};

use serde::{Deserialize, Serialize};

use crate::nbest::NBestList;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatTurn {
    pub role: Role,
    pub content: String,
}

impl ChatTurn {
    /// Empty content is replaced by a visible marker so every turn stays non-empty.
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        let content = content.into();
        let content = if content.trim().is_empty() {
            "(empty response)".to_string()
        } else {
            content
        };
        ChatTurn { role, content }
    }

    pub fn system(content: impl Into<String>) -> Self {
        Self::new(Role::System, content)
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self::new(Role::User, content)
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self::new(Role::Assistant, content)
    }
}

/// An N-best list from a training split paired with its true transcription.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demonstration {
    pub nbest: NBestList,
    pub transcription: Vec<String>,
}

impl Demonstration {
    /// Uses the list's own reference as the transcription.
    pub fn from_list(nbest: NBestList) -> Option<Self> {
        let transcription = nbest.reference.clone()?;
        Some(Demonstration { nbest, transcription })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HistoryMode {
    /// History is reset to the strategy prefix after every utterance.
    #[default]
    OneByOne,
    /// Each utterance's query and reply are kept for the following ones.
    Accumulating,
}

/// What the final query asks the model to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    #[default]
    Scores,
    Selection,
    Correction,
}

/// How assistant turns of the task-activating dialog are produced.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TapMode {
    /// Canned replies shipped with the templates.
    #[default]
    Replay,
    /// Replies collected from the live model, one per activation query.
    Live(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    ZeroShotScoring,
    ZeroShotReasoning,
    DomainHint(String),
    OneShot(Demonstration),
    FewShot(Vec<Demonstration>),
    Tap(Option<Demonstration>),
}

impl Variant {
    pub fn label(&self) -> &'static str {
        match self {
            Variant::ZeroShotScoring => "zero",
            Variant::ZeroShotReasoning => "zero-cot",
            Variant::DomainHint(_) => "domain-hint",
            Variant::OneShot(_) => "one-shot",
            Variant::FewShot(_) => "few-shot",
            Variant::Tap(_) => "tap",
        }
    }

    pub fn demonstrations(&self) -> &[Demonstration] {
        match self {
            Variant::OneShot(d) => std::slice::from_ref(d),
            Variant::FewShot(ds) => ds,
            Variant::Tap(Some(d)) => std::slice::from_ref(d),
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptStrategy {
    pub variant: Variant,
    pub task: TaskKind,
    pub history: HistoryMode,
    /// Extra domain hint, and the target domain named in the task-activating dialog.
    pub domain: Option<String>,
    /// Append the step-by-step cue to the final query.
    pub reasoning: bool,
    pub tap_mode: TapMode,
    /// Hard cap on the number of turns sent in one request.
    pub max_turns: Option<usize>,
}

impl PromptStrategy {
    pub fn new(variant: Variant, task: TaskKind) -> Self {
        PromptStrategy {
            variant,
            task,
            history: HistoryMode::OneByOne,
            domain: None,
            reasoning: false,
            tap_mode: TapMode::Replay,
            max_turns: None,
        }
    }

    pub fn with_history(mut self, history: HistoryMode) -> Self {
        self.history = history;
        self
    }

    pub fn with_domain(mut self, domain: impl Into<String>) -> Self {
        self.domain = Some(domain.into());
        self
    }

    pub fn with_reasoning(mut self, on: bool) -> Self {
        self.reasoning = on;
        self
    }

    pub fn uses_reasoning(&self) -> bool {
        self.reasoning || matches!(self.variant, Variant::ZeroShotReasoning)
    }

    pub fn domain_hint(&self) -> Option<&str> {
        match &self.variant {
            Variant::DomainHint(d) => Some(d),
            _ => self.domain.as_deref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PromptError {
    #[error("task-activating prompting needs one demonstration")]
    TapWithoutDemonstration,
    #[error("few-shot prompting needs at least one demonstration")]
    NoDemonstrations,
    #[error("live task-activating mode needs {expected} replies, got {got}")]
    TapReplies { expected: usize, got: usize },
    #[error("session was built for a different strategy")]
    SessionMismatch,
    #[error("demonstration {0} is also a test utterance")]
    DemoLeak(String),
    #[error("prompt would have {turns} turns, cap is {cap}")]
    TooManyTurns { turns: usize, cap: usize },
    #[error(transparent)]
    Template(#[from] TemplateError),
}
