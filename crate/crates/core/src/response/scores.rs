use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;

use super::{normalize_newlines, Fallback, OutputKind, ParseOutcome, ParsedLlmOutput};

fn line_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^\s*(\d+)\s*[.:]\s*([-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?)\s*$").expect("static regex")
    })
}

/// One score per hypothesis from lines of the form `k. v` or `k: v`.
///
/// A repeated index keeps its last value and marks the result recovered, as
/// do indices outside `1..=n`. Any missing index is a fallback.
pub fn parse_scores(text: &str, n: usize) -> ParseOutcome {
    let text = normalize_newlines(text);
    let mut found: BTreeMap<usize, f64> = BTreeMap::new();
    let mut repaired = false;
    for line in text.lines() {
        let Some(caps) = line_pattern().captures(line) else { continue };
        let (Ok(k), Ok(v)) = (caps[1].parse::<usize>(), caps[2].parse::<f64>()) else { continue };
        if !v.is_finite() {
            continue;
        }
        if k == 0 || k > n {
            repaired = true;
            continue;
        }
        repaired |= found.insert(k, v).is_some();
    }
    if n == 0 || found.len() < n {
        return Err(Fallback::new(format!("found scores for {} of {n} hypotheses", found.len())));
    }
    let kind = OutputKind::Scores(found.into_values().collect());
    Ok(if repaired { ParsedLlmOutput::recovered(kind) } else { ParsedLlmOutput::clean(kind) })
}
