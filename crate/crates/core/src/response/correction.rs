use crate::nbest::{normalize, NormConfig};

use super::{normalize_newlines, Fallback, OutputKind, ParseOutcome, ParsedLlmOutput};

/// Lines containing any of these are commentary, not a transcription.
pub const META_VOCABULARY: &[&str] = &[
    "hypothesis",
    "hypotheses",
    "probability",
    "probabilities",
    "rescoring",
    "cannot",
    "can't",
    "unable",
    "sorry",
    "determine",
    "answer",
];

const ANSWER_MARKERS: &[&str] = &["final output", "transcription"];

fn starts_with_list_marker(line: &str) -> bool {
    let digits = line.chars().take_while(char::is_ascii_digit).count();
    digits > 0 && matches!(line[digits..].chars().next(), Some('.' | ')' | ':'))
}

// Rule 1: text after the last colon of the last line naming the answer.
fn marked_answer(lines: &[&str], norm: &NormConfig) -> Option<Vec<String>> {
    lines.iter().rev().find_map(|line| {
        let lower = line.to_lowercase();
        if !ANSWER_MARKERS.iter().any(|m| lower.contains(m)) {
            return None;
        }
        let (_, tail) = line.rsplit_once(':')?;
        let words = normalize(tail, norm);
        (!words.is_empty()).then_some(words)
    })
}

// Rule 2: exactly one quoted span in the whole reply.
fn single_quote(text: &str, norm: &NormConfig) -> Option<Vec<String>> {
    let unified: String = text
        .chars()
        .map(|c| if matches!(c, '\u{201c}' | '\u{201d}') { '"' } else { c })
        .collect();
    let parts: Vec<&str> = unified.split('"').collect();
    // parts alternate outside/inside; exactly one quoted span means three parts.
    if parts.len() != 3 {
        return None;
    }
    let words = normalize(parts[1], norm);
    (!words.is_empty()).then_some(words)
}

// Rule 3: the last non-empty line, if it is free of commentary.
fn last_line(lines: &[&str], norm: &NormConfig) -> Option<Vec<String>> {
    let line = lines.iter().rev().map(|l| l.trim()).find(|l| !l.is_empty())?;
    let lower = line.to_lowercase();
    if META_VOCABULARY.iter().any(|m| lower.contains(m)) || starts_with_list_marker(line) {
        return None;
    }
    let words = normalize(line, norm);
    (!words.is_empty()).then_some(words)
}

/// Corrected transcription from a reply. Rules, in priority order: the text
/// after the last colon on a line containing "final output" or
/// "transcription" (clean); a single quoted sentence (recovered); the last
/// non-empty line when it carries no meta vocabulary (recovered).
pub fn parse_correction(text: &str, norm: &NormConfig) -> ParseOutcome {
    let text = normalize_newlines(text);
    let lines: Vec<&str> = text.lines().collect();
    if let Some(words) = marked_answer(&lines, norm) {
        return Ok(ParsedLlmOutput::clean(OutputKind::Correction(words)));
    }
    if let Some(words) = single_quote(&text, norm).or_else(|| last_line(&lines, norm)) {
        return Ok(ParsedLlmOutput::recovered(OutputKind::Correction(words)));
    }
    Err(Fallback::new("no transcription found"))
}
