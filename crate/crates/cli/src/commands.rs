use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use nbest_rescore::llm::{
    ChatBackend, ConcurrencyPolicy, HttpBackend, MockBackend, MockBehavior, MockMode, RetryPolicy, ScoreFn,
};
use nbest_rescore::nbest::{corpus_wer, normalize, oracle_wer, read_jsonl, write_jsonl, NormConfig};
use nbest_rescore::ngram::{load_arpa, NgramModel, OovPolicy};
use nbest_rescore::pipeline::{
    run_ngram, run_p1, run_p2, CorrectionMode, FusionConfig, P1Config, P2Config, RunResult,
};
use nbest_rescore::prompt::{select_demonstrations, HistoryMode, PromptStrategy, TaskKind, Variant};
use nbest_rescore::synth::{generate_corpus, ChannelConfig};
use nbest_rescore::NBestList;
use serde_json::json;

use crate::args::{HistoryName, LlmArgs, ModeName, RescoreArgs, StrategyName, SynthArgs, TaskName};
use crate::config::RunConfig;
use crate::error::Failure;

pub fn read_lists(path: &Path) -> Result<Vec<NBestList>, Failure> {
    let file = File::open(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    read_jsonl(BufReader::new(file), &NormConfig::default())
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn read_arpa(path: &Path) -> Result<NgramModel, Failure> {
    let file = File::open(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let model = load_arpa(BufReader::new(file)).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    Ok(model.with_oov_policy(OovPolicy::MapToUnk))
}

/// Writes to `path`, or to stdout when there is none.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    let result = match path {
        Some(p) => std::fs::write(p, bytes),
        None => std::io::stdout().lock().write_all(bytes),
    };
    result.map_err(|e| Failure::input(format!("cannot write output: {e}")))
}

fn pct(v: f64) -> String {
    format!("{:.2}", v * 100.0)
}

pub fn wer(input: &Path) -> Result<(), Failure> {
    let lists = read_lists(input)?;
    let first = corpus_wer(&lists, |_| Ok(1)).map_err(|e| Failure::input(e.to_string()))?;
    let oracle = oracle_wer(&lists).map_err(|e| Failure::input(e.to_string()))?;
    let out = format!(
        "utterances\tfirst_pass_wer_pct\toracle_wer_pct\n{}\t{}\t{}\n",
        lists.len(),
        pct(first.corpus_wer),
        pct(oracle.corpus_wer)
    );
    emit(None, out.as_bytes())
}

pub fn rescore_ngram(a: &RescoreArgs) -> Result<(), Failure> {
    let lists = read_lists(&a.input)?;
    let lm = read_arpa(&a.arpa)?;
    let fusion = FusionConfig { lambda_lm: a.lambda, use_acoustic: !a.no_acoustic };
    let mut result = run_ngram(&lists, &lm, &fusion)?;
    result.config.insert(
        "run".into(),
        json!({ "input": a.input, "arpa": a.arpa, "lambda": a.lambda, "use_acoustic": !a.no_acoustic }),
    );
    if let Some(name) = &a.name {
        result.name = name.clone();
    }
    emit(a.out.as_deref(), result.to_json().as_bytes())
}

pub fn synth(a: &SynthArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.config).map_err(|e| Failure::usage(format!("{}: {e}", a.config.display())))?;
    let mut cfg: ChannelConfig =
        serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", a.config.display())))?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let refs_file = File::open(&a.refs).map_err(|e| Failure::input(format!("{}: {e}", a.refs.display())))?;
    let mut refs = Vec::new();
    for line in BufReader::new(refs_file).lines() {
        let line = line.map_err(|e| Failure::input(format!("{}: {e}", a.refs.display())))?;
        let words = normalize(&line, &NormConfig::default());
        if !words.is_empty() {
            refs.push(words);
        }
    }
    let (lists, manifest) = generate_corpus(&refs, &cfg).map_err(|e| Failure::usage(e.to_string()))?;
    let mut buf = Vec::new();
    write_jsonl(&mut buf, &lists).expect("writing to memory");
    emit(a.out.as_deref(), &buf)?;
    let manifest_path = a.manifest.clone().or_else(|| a.out.as_ref().map(|o| PathBuf::from(format!("{}.manifest.json", o.display()))));
    if let Some(p) = manifest_path {
        let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        json.push('\n');
        emit(Some(&p), json.as_bytes())?;
    }
    Ok(())
}

#[derive(Clone, Copy)]
pub enum Pipeline {
    P1,
    P2,
}

fn backend(cfg: &RunConfig, lists: &[NBestList]) -> Result<Box<dyn ChatBackend>, Failure> {
    let timeout = Duration::try_from_secs_f64(cfg.timeout_secs)
        .map_err(|_| Failure::usage(format!("invalid timeout {}", cfg.timeout_secs)))?;
    if cfg.backend == "http" {
        let b = HttpBackend::from_env(cfg.endpoint.as_deref(), timeout).map_err(|e| Failure::usage(e.to_string()))?;
        return Ok(Box::new(b));
    }
    let Some(mode) = cfg.backend.strip_prefix("mock:") else {
        return Err(Failure::usage(format!("unknown backend {:?}", cfg.backend)));
    };
    let mode = match mode {
        "echo" => MockMode::EchoOracle,
        "oracle-scores" => MockMode::ScoreList(ScoreFn::neg_edit_distance()),
        "first-pass-scores" => MockMode::ScoreList(ScoreFn::first_pass()),
        "random-scores" => MockMode::ScoreList(ScoreFn::random(cfg.seed)),
        "scripted" => {
            let path = cfg.script.as_ref().ok_or_else(|| Failure::usage("mock:scripted needs --script"))?;
            let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            let script: BTreeMap<String, String> =
                serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            MockMode::Scripted(script)
        }
        other => match other.strip_prefix("rank:").and_then(|k| k.parse::<usize>().ok()) {
            Some(k) if k >= 1 => MockMode::RankK(k),
            _ => return Err(Failure::usage(format!("unknown mock mode {other:?}"))),
        },
    };
    Ok(Box::new(MockBackend::new(MockBehavior::new(mode, cfg.seed), lists)))
}

fn strategy(cfg: &RunConfig, pipeline: Pipeline) -> Result<PromptStrategy, Failure> {
    let train = match &cfg.train {
        Some(p) => read_lists(p)?,
        None => Vec::new(),
    };
    let demos = |k: usize| {
        if cfg.train.is_none() {
            return Err(Failure::usage(format!("--strategy {} needs --train", label(cfg.strategy))));
        }
        let d = select_demonstrations(&train, k);
        if d.is_empty() {
            return Err(Failure::usage("the training file has no utterance with a reference"));
        }
        Ok(d)
    };
    let variant = match cfg.strategy {
        StrategyName::Zero => Variant::ZeroShotScoring,
        StrategyName::ZeroCot => Variant::ZeroShotReasoning,
        StrategyName::DomainHint => {
            Variant::DomainHint(cfg.domain.clone().ok_or_else(|| Failure::usage("--strategy domain-hint needs --domain"))?)
        }
        StrategyName::OneShot => Variant::OneShot(demos(1)?.remove(0)),
        StrategyName::FewShot => Variant::FewShot(demos(cfg.shots.max(1))?),
        StrategyName::Tap => Variant::Tap(Some(demos(1)?.remove(0))),
    };
    let task = match (cfg.task, pipeline) {
        (Some(TaskName::Scores), _) | (None, Pipeline::P2) => TaskKind::Scores,
        (Some(TaskName::Selection), _) => TaskKind::Selection,
        (Some(TaskName::Correction), _) | (None, Pipeline::P1) => TaskKind::Correction,
    };
    let history = match cfg.history {
        HistoryName::OneByOne => HistoryMode::OneByOne,
        HistoryName::Accumulate => HistoryMode::Accumulating,
    };
    let mut s = PromptStrategy::new(variant, task).with_history(history).with_reasoning(cfg.reasoning);
    if let Some(d) = &cfg.domain {
        s = s.with_domain(d.clone());
    }
    Ok(s)
}

fn label(s: StrategyName) -> String {
    serde_json::to_value(s).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

fn concurrency(cfg: &RunConfig) -> Result<ConcurrencyPolicy, Failure> {
    if cfg.max_in_flight == 0 || cfg.max_attempts == 0 {
        return Err(Failure::usage("--max-in-flight and --max-attempts must be at least 1"));
    }
    Ok(ConcurrencyPolicy {
        max_in_flight: cfg.max_in_flight,
        retry: RetryPolicy { max_attempts: cfg.max_attempts, seed: cfg.seed, ..RetryPolicy::default() },
        fail_fast: false,
    })
}

pub fn llm_run(args: &LlmArgs, pipeline: Pipeline) -> Result<(), Failure> {
    let cfg = RunConfig::resolve(args)?;
    if !(0.0..=1.0).contains(&cfg.max_fallback_rate) {
        return Err(Failure::usage(format!("--max-fallback-rate {} is not in [0, 1]", cfg.max_fallback_rate)));
    }
    let input = cfg.input.as_ref().ok_or_else(|| Failure::usage("no input file given"))?;
    let lists = read_lists(input)?;
    let strategy = strategy(&cfg, pipeline)?;
    let backend = backend(&cfg, &lists)?;
    let fusion = FusionConfig { lambda_lm: cfg.lambda, use_acoustic: cfg.use_acoustic };
    let mut result = match pipeline {
        Pipeline::P1 => {
            let lm = cfg.arpa.as_deref().map(read_arpa).transpose()?;
            let p1 = P1Config {
                fusion,
                mode: match cfg.mode {
                    ModeName::Augment => CorrectionMode::Augment,
                    ModeName::Replace => CorrectionMode::Replace,
                },
                model_name: cfg.model.clone(),
                concurrency: concurrency(&cfg)?,
                norm: NormConfig::default(),
                tap_live: cfg.tap_live,
            };
            run_p1(&lists, backend.as_ref(), &strategy, lm.as_ref(), &p1)?
        }
        Pipeline::P2 => {
            let p2 = P2Config {
                fusion,
                model_name: cfg.model.clone(),
                concurrency: concurrency(&cfg)?,
                norm: NormConfig::default(),
                tap_live: cfg.tap_live,
            };
            run_p2(&lists, backend.as_ref(), &strategy, &p2)?
        }
    };
    if let Some(name) = &cfg.name {
        result.name = name.clone();
    }
    result.config.insert("run".into(), serde_json::to_value(&cfg).expect("config serializes"));
    if let Some(dir) = &args.dump_raw {
        dump_raw(dir, &result)?;
    }
    emit(args.out.as_deref(), result.to_json().as_bytes())?;
    let rate = result.parser_stats.fallback_rate();
    if rate > cfg.max_fallback_rate {
        return Err(Failure::backend(format!(
            "fallback rate {rate:.3} exceeds {} ({} fallbacks, {} backend errors)",
            cfg.max_fallback_rate, result.parser_stats.fallback, result.backend_errors
        )));
    }
    Ok(())
}

fn dump_raw(dir: &Path, result: &RunResult) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
    for (tag, bytes) in &result.raw_payloads {
        let file: String = tag.chars().map(|c| if c == '/' || c == '\\' { '_' } else { c }).collect();
        std::fs::write(dir.join(format!("{file}.json")), bytes)
            .map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
    }
    Ok(())
}
