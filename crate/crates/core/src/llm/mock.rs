//! Deterministic in-process backend. The reply for a request depends only on
//! the request, the behavior and the seed.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;
use std::time::Duration;

use super::{ChatBackend, FinishReason, LlmError, LlmRequest, LlmResponse};
use crate::nbest::{edit_errors, Hypothesis, NBestList};
use crate::util::{child_seed, fnv1a, mix64};

/// Reply to requests whose tag does not name a known utterance (for example
/// the activation turns of a live task-activating dialog).
pub const ACKNOWLEDGEMENT: &str = "Yes, I understand.";

type ScoreFnInner = dyn Fn(&NBestList, &Hypothesis) -> f64 + Send + Sync;

/// Score assigned to each hypothesis by [`MockMode::ScoreList`].
#[derive(Clone)]
pub struct ScoreFn {
    name: String,
    f: Arc<ScoreFnInner>,
}

impl ScoreFn {
    pub fn new(name: impl Into<String>, f: impl Fn(&NBestList, &Hypothesis) -> f64 + Send + Sync + 'static) -> Self {
        ScoreFn { name: name.into(), f: Arc::new(f) }
    }

    /// Minus the edit distance to the reference (0 when there is none).
    pub fn neg_edit_distance() -> Self {
        ScoreFn::new("neg-edit-distance", |list, h| {
            list.reference.as_ref().map_or(0.0, |r| 0.0 - edit_errors(r, &h.words) as f64)
        })
    }

    /// The hypothesis' own first-pass score.
    pub fn first_pass() -> Self {
        ScoreFn::new("first-pass", |_, h| h.score)
    }

    /// Pseudo-random score in [-10, 0) keyed by (seed, utterance, rank).
    pub fn random(seed: u64) -> Self {
        ScoreFn::new(format!("random-{seed}"), move |list, h| {
            let z = child_seed(seed ^ fnv1a(&list.utterance_id), h.rank as u64);
            -10.0 * ((z >> 11) as f64 / (1u64 << 53) as f64)
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn score(&self, list: &NBestList, h: &Hypothesis) -> f64 {
        (self.f)(list, h)
    }
}

impl fmt::Debug for ScoreFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScoreFn({})", self.name)
    }
}

#[derive(Debug, Clone)]
pub enum MockMode {
    /// Replies with the utterance's reference. Test-only.
    EchoOracle,
    /// Fixed reply text per request tag.
    Scripted(BTreeMap<String, String>),
    /// Replies with the text of hypothesis `k` (1-based).
    RankK(usize),
    /// Replies with a numbered score list, one line per hypothesis.
    ScoreList(ScoreFn),
}

impl MockMode {
    pub fn label(&self) -> String {
        match self {
            MockMode::EchoOracle => "echo".into(),
            MockMode::Scripted(_) => "scripted".into(),
            MockMode::RankK(k) => format!("rank:{k}"),
            MockMode::ScoreList(f) => format!("scores:{}", f.name()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MockBehavior {
    pub mode: MockMode,
    pub seed: u64,
    /// Upper bound of a simulated, seed-determined latency.
    pub max_latency: Duration,
}

impl MockBehavior {
    pub fn new(mode: MockMode, seed: u64) -> Self {
        MockBehavior { mode, seed, max_latency: Duration::ZERO }
    }

    pub fn with_latency(mut self, max_latency: Duration) -> Self {
        self.max_latency = max_latency;
        self
    }
}

#[derive(Debug, Clone)]
pub struct MockBackend {
    behavior: MockBehavior,
    lists: HashMap<String, NBestList>,
}

impl MockBackend {
    /// The mock answers from the lists it is given, keyed by utterance id.
    pub fn new(behavior: MockBehavior, lists: &[NBestList]) -> Self {
        MockBackend {
            behavior,
            lists: lists.iter().map(|l| (l.utterance_id.clone(), l.clone())).collect(),
        }
    }

    fn reply(&self, req: &LlmRequest) -> Result<String, LlmError> {
        if let MockMode::Scripted(script) = &self.behavior.mode {
            return script
                .get(&req.request_tag)
                .cloned()
                .ok_or_else(|| LlmError::Mock(format!("no scripted reply for tag {:?}", req.request_tag)));
        }
        let Some(list) = self.lists.get(&req.request_tag) else {
            return Ok(ACKNOWLEDGEMENT.to_string());
        };
        match &self.behavior.mode {
            MockMode::EchoOracle => list
                .reference
                .as_ref()
                .map(|r| r.join(" "))
                .ok_or_else(|| LlmError::Mock(format!("utterance {} has no reference", list.utterance_id))),
            MockMode::RankK(k) => list
                .get(*k)
                .map(Hypothesis::text)
                .ok_or_else(|| LlmError::Mock(format!("utterance {} has no rank {k}", list.utterance_id))),
            MockMode::ScoreList(f) => Ok(list
                .hypotheses
                .iter()
                .map(|h| format!("{}. {}", h.rank, f.score(list, h)))
                .collect::<Vec<_>>()
                .join("\n")),
            MockMode::Scripted(_) => unreachable!("handled above"),
        }
    }

    fn latency(&self, tag: &str) -> Duration {
        let nanos = self.behavior.max_latency.as_nanos() as u64;
        if nanos == 0 {
            return Duration::ZERO;
        }
        Duration::from_nanos(mix64(self.behavior.seed ^ fnv1a(tag)) % nanos)
    }
}

impl ChatBackend for MockBackend {
    fn send(&self, req: &LlmRequest) -> Result<LlmResponse, LlmError> {
        let latency = self.latency(&req.request_tag);
        if !latency.is_zero() {
            std::thread::sleep(latency);
        }
        let text = self.reply(req)?;
        let raw = serde_json::json!({
            "choices": [{"message": {"role": "assistant", "content": text}, "finish_reason": "stop"}],
            "model": req.model_name,
        });
        Ok(LlmResponse {
            text,
            finish_reason: FinishReason::Stop,
            latency,
            raw_payload: serde_json::to_vec(&raw).unwrap_or_default(),
        })
    }

    fn describe(&self) -> String {
        format!("mock:{}", self.behavior.mode.label())
    }
}
