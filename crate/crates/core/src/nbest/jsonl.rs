//! JSON Lines interchange format: one utterance per line, hypothesis order defines rank.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{normalize, ListError, NBestList, NormConfig};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("line {line}: {source}")]
    List { line: usize, source: ListError },
    #[error("line {line}: non-finite score")]
    NonFinite { line: usize },
    #[error("line {line}: duplicate utterance id {id}")]
    DuplicateId { line: usize, id: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
struct Record {
    id: String,
    #[serde(default)]
    reference: Option<String>,
    hypotheses: Vec<RecordHyp>,
}

#[derive(Serialize, Deserialize)]
struct RecordHyp {
    text: String,
    score: f64,
}

/// Parses one JSONL record.
pub fn parse_record(line: &str, norm: &NormConfig) -> Result<NBestList, FormatError> {
    parse_line(line, 1, norm)
}

fn parse_line(line: &str, lineno: usize, norm: &NormConfig) -> Result<NBestList, FormatError> {
    let rec: Record =
        serde_json::from_str(line).map_err(|source| FormatError::Json { line: lineno, source })?;
    if rec.hypotheses.iter().any(|h| !h.score.is_finite()) {
        return Err(FormatError::NonFinite { line: lineno });
    }
    NBestList::new(
        rec.id,
        rec.hypotheses.iter().map(|h| (normalize(&h.text, norm), h.score)),
        rec.reference.as_deref().map(|r| normalize(r, norm)),
    )
    .map_err(|source| FormatError::List { line: lineno, source })
}

/// Reads a whole N-best file. Blank lines are skipped; ids must be unique.
pub fn read_jsonl<R: BufRead>(reader: R, norm: &NormConfig) -> Result<Vec<NBestList>, FormatError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let list = parse_line(trimmed, i + 1, norm)?;
        if !seen.insert(list.utterance_id.clone()) {
            return Err(FormatError::DuplicateId { line: i + 1, id: list.utterance_id });
        }
        out.push(list);
    }
    Ok(out)
}

pub fn write_jsonl<W: Write>(mut writer: W, lists: &[NBestList]) -> std::io::Result<()> {
    for list in lists {
        let rec = Record {
            id: list.utterance_id.clone(),
            reference: list.reference.as_ref().map(|r| r.join(" ")),
            hypotheses: list
                .hypotheses
                .iter()
                .map(|h| RecordHyp { text: h.text(), score: h.score })
                .collect(),
        };
        serde_json::to_writer(&mut writer, &rec)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
