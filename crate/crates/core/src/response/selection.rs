use std::sync::OnceLock;

use regex::Regex;

use super::{normalize_newlines, Fallback, OutputKind, ParseOutcome, ParsedLlmOutput};
use crate::nbest::{normalize, NBestList, NormConfig};

/// Words that make an adjacent integer an explicit choice.
pub const SELECTION_VOCABULARY: &[&str] = &["hypothesis", "number", "option"];

fn vocabulary_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        let words = SELECTION_VOCABULARY.join("|");
        Regex::new(&format!(r"(?i)\b(?:{words})\s*(?:#|no\.?)?\s*(\d+)")).expect("static regex")
    })
}

/// Digit runs not glued to letters, signs or decimal points, with their offsets.
fn standalone_integers(text: &str) -> Vec<(usize, usize)> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        if !b[i].is_ascii_digit() {
            i += 1;
            continue;
        }
        let start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        let before_ok = start == 0 || !(b[start - 1].is_ascii_alphanumeric() || matches!(b[start - 1], b'.' | b'-' | b'_'));
        let after_ok = match b.get(i) {
            None => true,
            Some(c) if c.is_ascii_alphanumeric() || *c == b'_' => false,
            Some(b'.' | b',') => !b.get(i + 1).is_some_and(u8::is_ascii_digit),
            Some(_) => true,
        };
        if before_ok && after_ok {
            out.push((start, i));
        }
    }
    out
}

fn in_range(digits: &str, n: usize) -> Option<usize> {
    digits.parse::<usize>().ok().filter(|k| (1..=n).contains(k))
}

// Rule 2: the reply ends with a hypothesis' text; longest such hypothesis wins.
fn tail_match(text: &str, list: &NBestList, norm: &NormConfig) -> Option<usize> {
    let words = normalize(text, norm);
    let mut best: Option<(usize, usize)> = None;
    for h in &list.hypotheses {
        let len = h.words.len();
        if len == 0 || len > words.len() || words[words.len() - len..] != h.words[..] {
            continue;
        }
        if best.is_none_or(|(_, l)| len > l) {
            best = Some((h.rank, len));
        }
    }
    best.map(|(rank, _)| rank)
}

/// Chosen 1-based rank. Rules, in priority order: an integer in range right
/// after a selection word such as "hypothesis 3" (clean); a reply whose tail
/// is exactly one hypothesis (recovered); the first standalone integer in
/// range (recovered).
pub fn parse_selection(text: &str, list: &NBestList, norm: &NormConfig) -> ParseOutcome {
    let text = normalize_newlines(text);
    let n = list.len();
    let standalone = standalone_integers(&text);
    for caps in vocabulary_pattern().captures_iter(&text) {
        let m = caps.get(1).expect("group 1");
        if !standalone.contains(&(m.start(), m.end())) {
            continue;
        }
        if let Some(k) = in_range(m.as_str(), n) {
            return Ok(ParsedLlmOutput::clean(OutputKind::Selection(k)));
        }
    }
    if let Some(k) = tail_match(&text, list, norm) {
        return Ok(ParsedLlmOutput::recovered(OutputKind::Selection(k)));
    }
    standalone
        .iter()
        .find_map(|&(s, e)| in_range(&text[s..e], n))
        .map(|k| ParsedLlmOutput::recovered(OutputKind::Selection(k)))
        .ok_or_else(|| Fallback::new(format!("no selection in 1..={n}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response::Confidence;

    fn list() -> NBestList {
        NBestList::from_texts(
            "u",
            &[("show me flights", -1.0), ("show me the flights", -2.0), ("flights", -3.0)],
            None,
        )
        .unwrap()
    }

    fn parse(text: &str) -> ParseOutcome {
        parse_selection(text, &list(), &NormConfig::default())
    }

    #[test]
    fn vocabulary_adjacent() {
        let out = parse("I pick hypothesis 2.").unwrap();
        assert_eq!(out, ParsedLlmOutput::clean(OutputKind::Selection(2)));
        let out = parse("Option #3 looks right").unwrap();
        assert_eq!(out, ParsedLlmOutput::clean(OutputKind::Selection(3)));
        let out = parse("Hypothesis 7 is invalid, so number 1").unwrap();
        assert_eq!(out, ParsedLlmOutput::clean(OutputKind::Selection(1)));
    }

    #[test]
    fn ambiguous_integer_is_recovered() {
        let out = parse("It is either 1 or 2").unwrap();
        assert_eq!(out, ParsedLlmOutput::recovered(OutputKind::Selection(1)));
    }

    #[test]
    fn tail_prefers_longest() {
        let out = parse("The best one: show me the flights").unwrap();
        assert_eq!(out.kind, OutputKind::Selection(2));
        assert_eq!(out.confidence, Confidence::Recovered);
        let out = parse("flights").unwrap();
        assert_eq!(out.kind, OutputKind::Selection(3));
    }

    #[test]
    fn glued_numbers_ignored() {
        assert!(parse("score 1.5 for item2").is_err());
        assert!(parse("-1").is_err());
        assert!(parse("").is_err());
        assert!(parse("I'd go with 9").is_err());
    }
}
