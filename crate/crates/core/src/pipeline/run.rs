use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{select_fused, FusionConfig, PipelineError, RunResult, Selection};
use crate::llm::{complete, complete_batch, ChatBackend, ConcurrencyPolicy, LlmError, LlmRequest, RetryPolicy};
use crate::nbest::{corpus_wer, edit_errors, oracle_wer, Hypothesis, NBestList, NormConfig};
use crate::ngram::{ngram_scores_ln, NgramModel};
use crate::prompt::{
    advance_history, check_disjoint, render, tap_activation, ChatTurn, ConversationState, HistoryMode,
    PromptStrategy, TapMode, TaskKind, Variant, TEMPLATE_VERSION,
};
use crate::response::{
    parse_correction, parse_scores, parse_selection, Fallback, OutputKind, ParseOutcome, ParserStats,
};

/// What P1 does with a parsed correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrectionMode {
    /// Append the correction as candidate N+1.
    #[default]
    Augment,
    /// Replace the list by the correction alone.
    Replace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P1Config {
    pub fusion: FusionConfig,
    pub mode: CorrectionMode,
    pub model_name: String,
    pub concurrency: ConcurrencyPolicy,
    pub norm: NormConfig,
    /// Collect the task-activating replies from the backend instead of replaying them.
    pub tap_live: bool,
}

impl Default for P1Config {
    fn default() -> Self {
        P1Config {
            fusion: FusionConfig::default(),
            mode: CorrectionMode::Augment,
            model_name: "default".into(),
            concurrency: ConcurrencyPolicy::default(),
            norm: NormConfig::default(),
            tap_live: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P2Config {
    /// `lambda_lm` weights the model's scores in Scores mode.
    pub fusion: FusionConfig,
    pub model_name: String,
    pub concurrency: ConcurrencyPolicy,
    pub norm: NormConfig,
    pub tap_live: bool,
}

impl Default for P2Config {
    fn default() -> Self {
        P2Config {
            fusion: FusionConfig::default(),
            model_name: "default".into(),
            concurrency: ConcurrencyPolicy::default(),
            norm: NormConfig::default(),
            tap_live: false,
        }
    }
}

const ACTIVATION_TAG: &str = "tap-activation";

/// Runs the three activation turns against the backend as one growing dialog
/// and returns the replies as a live mode.
pub fn activate_tap<B: ChatBackend + ?Sized>(
    backend: &B,
    model_name: &str,
    retry: &RetryPolicy,
) -> Result<(TapMode, BTreeMap<String, Vec<u8>>), LlmError> {
    let mut turns = Vec::new();
    let mut replies = Vec::new();
    let mut raw = BTreeMap::new();
    for (i, query) in tap_activation().into_iter().enumerate() {
        turns.push(ChatTurn::user(query));
        let tag = format!("{ACTIVATION_TAG}-{}", i + 1);
        let resp = complete(&LlmRequest::new(model_name, &tag, turns.clone()), backend, retry)?;
        turns.push(ChatTurn::assistant(resp.text.clone()));
        raw.insert(tag, resp.raw_payload);
        replies.push(resp.text);
    }
    Ok((TapMode::Live(replies), raw))
}

struct Replies {
    texts: Vec<Result<String, LlmError>>,
    calls: usize,
    raw: BTreeMap<String, Vec<u8>>,
    strategy: PromptStrategy,
}

fn query_all<B: ChatBackend + ?Sized>(
    lists: &[NBestList],
    backend: &B,
    strategy: &PromptStrategy,
    model_name: &str,
    concurrency: &ConcurrencyPolicy,
    tap_live: bool,
) -> Result<Replies, PipelineError> {
    check_disjoint(strategy.variant.demonstrations(), lists)?;
    let mut strategy = strategy.clone();
    let mut calls = 0;
    let mut raw = BTreeMap::new();
    if tap_live && matches!(strategy.variant, Variant::Tap(_)) {
        let (mode, activation_raw) =
            activate_tap(backend, model_name, &concurrency.retry).map_err(PipelineError::Activation)?;
        strategy.tap_mode = mode;
        raw.extend(activation_raw);
        calls += 3;
    }
    let mut session = ConversationState::new(&strategy)?;
    let responses = match strategy.history {
        HistoryMode::OneByOne => {
            let reqs = lists
                .iter()
                .map(|l| Ok(LlmRequest::new(model_name, &l.utterance_id, render(&strategy, l, &session)?)))
                .collect::<Result<Vec<_>, PipelineError>>()?;
            complete_batch(&reqs, backend, concurrency)
        }
        HistoryMode::Accumulating => {
            let mut out = Vec::with_capacity(lists.len());
            for l in lists {
                let req = LlmRequest::new(model_name, &l.utterance_id, render(&strategy, l, &session)?);
                let resp = complete(&req, backend, &concurrency.retry);
                let reply = resp.as_ref().map_or("", |r| r.text.as_str());
                session = advance_history(session, l, reply)?;
                out.push(resp);
            }
            out
        }
    };
    calls += lists.len();
    let texts = lists
        .iter()
        .zip(responses)
        .map(|(l, r)| {
            r.map(|resp| {
                raw.insert(l.utterance_id.clone(), resp.raw_payload);
                resp.text
            })
        })
        .collect();
    Ok(Replies { texts, calls, raw, strategy })
}

fn top_score(list: &NBestList) -> f64 {
    list.hypotheses.iter().map(|h| h.score).fold(f64::NEG_INFINITY, f64::max)
}

/// Closest hypothesis to `words` by edit distance, lowest rank on ties.
fn nearest_rank(list: &NBestList, words: &[String]) -> usize {
    list.hypotheses
        .iter()
        .min_by_key(|h| (edit_errors(words, &h.words), h.rank))
        .map_or(1, |h| h.rank)
}

fn all_referenced(lists: &[NBestList]) -> bool {
    lists.iter().all(|l| l.reference.is_some())
}

struct Outcome<'a> {
    name: String,
    config: BTreeMap<String, Value>,
    original: &'a [NBestList],
    evaluated: Vec<NBestList>,
    choices: Vec<usize>,
    originals_len: Vec<usize>,
    stats: ParserStats,
    backend_errors: usize,
    calls: usize,
    raw: BTreeMap<String, Vec<u8>>,
}

fn assemble(o: Outcome<'_>) -> Result<RunResult, PipelineError> {
    let mut selections = BTreeMap::new();
    for ((list, &rank), &n) in o.evaluated.iter().zip(&o.choices).zip(&o.originals_len) {
        let h = list.get(rank).ok_or_else(|| PipelineError::Config(format!("rank {rank} out of range")))?;
        let corrected = rank > n || list.len() != n;
        selections.insert(list.utterance_id.clone(), Selection { rank, text: h.text(), corrected });
    }
    let (wer_report, first_pass_wer, oracle) = if all_referenced(o.original) {
        let mut it = o.choices.iter();
        let report = corpus_wer(&o.evaluated, |_| Ok(*it.next().expect("one choice per list")))?;
        let first = corpus_wer(o.original, |_| Ok(1))?.corpus_wer;
        let oracle = oracle_wer(&o.evaluated)?.corpus_wer;
        (Some(report), Some(first), Some(oracle))
    } else {
        (None, None, None)
    };
    Ok(RunResult {
        name: o.name,
        config: o.config,
        selections,
        wer_report,
        first_pass_wer,
        oracle_wer: oracle,
        parser_stats: o.stats,
        backend_errors: o.backend_errors,
        llm_call_count: o.calls,
        raw_payloads: o.raw,
    })
}

fn strategy_config(strategy: &PromptStrategy, backend: &str, model: &str) -> BTreeMap<String, Value> {
    let demos: Vec<&str> = strategy
        .variant
        .demonstrations()
        .iter()
        .map(|d| d.nbest.utterance_id.as_str())
        .collect();
    BTreeMap::from([
        ("strategy".into(), json!(strategy.variant.label())),
        ("task".into(), json!(strategy.task)),
        ("history".into(), json!(strategy.history)),
        ("reasoning".into(), json!(strategy.uses_reasoning())),
        ("domain".into(), json!(strategy.domain_hint())),
        ("tap_mode".into(), json!(matches!(strategy.tap_mode, TapMode::Live(_)).then_some("live").unwrap_or("replay"))),
        ("demonstrations".into(), json!(demos)),
        ("backend".into(), json!(backend)),
        ("model".into(), json!(model)),
        ("template_version".into(), json!(TEMPLATE_VERSION)),
    ])
}

fn parse_reply(
    reply: &Result<String, LlmError>,
    parse: impl FnOnce(&str) -> ParseOutcome,
    backend_errors: &mut usize,
) -> ParseOutcome {
    match reply {
        Ok(text) => parse(text),
        Err(e) => {
            *backend_errors += 1;
            Err(Fallback { reason: e.to_string() })
        }
    }
}

/// P1: one correction request per utterance, then n-gram rescoring of the
/// corrected lists. Without a model the LM term is zero. In augment mode an
/// exact fused-score tie goes to the correction.
pub fn run_p1<B: ChatBackend + ?Sized>(
    lists: &[NBestList],
    backend: &B,
    strategy: &PromptStrategy,
    lm: Option<&NgramModel>,
    cfg: &P1Config,
) -> Result<RunResult, PipelineError> {
    if strategy.task != TaskKind::Correction && !matches!(strategy.variant, Variant::Tap(_)) {
        return Err(PipelineError::Config("P1 needs a strategy that asks for corrections".into()));
    }
    let replies = query_all(lists, backend, strategy, &cfg.model_name, &cfg.concurrency, cfg.tap_live)?;
    let mut stats = ParserStats::default();
    let mut backend_errors = 0;
    let mut evaluated = Vec::with_capacity(lists.len());
    let mut choices = Vec::with_capacity(lists.len());
    for (list, reply) in lists.iter().zip(&replies.texts) {
        let parsed = parse_reply(reply, |t| parse_correction(t, &cfg.norm), &mut backend_errors);
        stats.record_outcome(&parsed);
        let (candidates, prefer) = match parsed {
            Ok(p) => match p.kind {
                OutputKind::Correction(words) => {
                    let score = top_score(list);
                    match cfg.mode {
                        CorrectionMode::Augment => {
                            let mut l = list.clone();
                            let rank = l.push(words, score);
                            (l, Some(rank))
                        }
                        CorrectionMode::Replace => {
                            let mut l = list.clone();
                            l.hypotheses = vec![Hypothesis { words, score, rank: 1 }];
                            (l, Some(1))
                        }
                    }
                }
                _ => (list.clone(), None),
            },
            Err(_) => (list.clone(), None),
        };
        let lm_scores = match lm {
            Some(m) => ngram_scores_ln(&candidates, m)?,
            None => vec![0.0; candidates.len()],
        };
        choices.push(select_fused(&candidates, &lm_scores, &cfg.fusion, prefer));
        evaluated.push(candidates);
    }
    let mut config = strategy_config(&replies.strategy, &backend.describe(), &cfg.model_name);
    config.insert("pipeline".into(), json!("p1"));
    config.insert("fusion".into(), json!(cfg.fusion));
    config.insert("correction_mode".into(), json!(cfg.mode));
    config.insert("ngram_order".into(), json!(lm.map(NgramModel::max_order)));
    assemble(Outcome {
        name: format!("p1-{}", strategy.variant.label()),
        config,
        original: lists,
        evaluated,
        choices,
        originals_len: lists.iter().map(NBestList::len).collect(),
        stats,
        backend_errors,
        calls: replies.calls,
        raw: replies.raw,
    })
}

/// P2: the model scores, picks or rewrites; the choice is always one of the
/// original hypotheses. Scores are fused with first-pass scores, a
/// correction maps to its nearest hypothesis, and a fallback picks rank 1.
pub fn run_p2<B: ChatBackend + ?Sized>(
    lists: &[NBestList],
    backend: &B,
    strategy: &PromptStrategy,
    cfg: &P2Config,
) -> Result<RunResult, PipelineError> {
    let replies = query_all(lists, backend, strategy, &cfg.model_name, &cfg.concurrency, cfg.tap_live)?;
    let task = match strategy.variant {
        Variant::Tap(_) => TaskKind::Correction,
        _ => strategy.task,
    };
    let mut stats = ParserStats::default();
    let mut backend_errors = 0;
    let mut choices = Vec::with_capacity(lists.len());
    for (list, reply) in lists.iter().zip(&replies.texts) {
        let parsed = parse_reply(
            reply,
            |t| match task {
                TaskKind::Scores => parse_scores(t, list.len()),
                TaskKind::Selection => parse_selection(t, list, &cfg.norm),
                TaskKind::Correction => parse_correction(t, &cfg.norm),
            },
            &mut backend_errors,
        );
        stats.record_outcome(&parsed);
        let rank = match parsed.map(|p| p.kind) {
            Ok(OutputKind::Scores(s)) => select_fused(list, &s, &cfg.fusion, None),
            Ok(OutputKind::Selection(k)) => k,
            Ok(OutputKind::Correction(words)) => nearest_rank(list, &words),
            Err(_) => 1,
        };
        choices.push(rank);
    }
    let mut config = strategy_config(&replies.strategy, &backend.describe(), &cfg.model_name);
    config.insert("pipeline".into(), json!("p2"));
    config.insert("fusion".into(), json!(cfg.fusion));
    assemble(Outcome {
        name: format!("p2-{}", strategy.variant.label()),
        config,
        original: lists,
        evaluated: lists.to_vec(),
        choices,
        originals_len: lists.iter().map(NBestList::len).collect(),
        stats,
        backend_errors,
        calls: replies.calls,
        raw: replies.raw,
    })
}

/// n-gram rescoring alone, packaged like the LLM runs.
pub fn run_ngram(lists: &[NBestList], lm: &NgramModel, fusion: &FusionConfig) -> Result<RunResult, PipelineError> {
    let choices = crate::ngram::ngram_rescore(lists, lm, fusion)?;
    let config = BTreeMap::from([
        ("pipeline".to_string(), json!("ngram")),
        ("fusion".to_string(), json!(fusion)),
        ("ngram_order".to_string(), json!(lm.max_order())),
    ]);
    assemble(Outcome {
        name: "ngram".into(),
        config,
        original: lists,
        evaluated: lists.to_vec(),
        choices,
        originals_len: lists.iter().map(NBestList::len).collect(),
        stats: ParserStats::default(),
        backend_errors: 0,
        calls: 0,
        raw: BTreeMap::new(),
    })
}
