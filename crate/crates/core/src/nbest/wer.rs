use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{align, AlignmentResult, NBestList};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WerError {
    #[error("zero-length reference{}", .0.as_deref().map(|id| format!(" in utterance {id}")).unwrap_or_default())]
    EmptyReference(Option<String>),
    #[error("utterance {0} has no reference")]
    MissingReference(String),
    #[error("utterance {id}: selected rank {rank} outside 1..={n}")]
    BadSelection { id: String, rank: usize, n: usize },
    #[error("duplicate utterance id {0}")]
    DuplicateId(String),
}

/// Per-utterance error rate.
pub fn utterance_wer(a: &AlignmentResult) -> Result<f64, WerError> {
    if a.ref_len == 0 {
        return Err(WerError::EmptyReference(None));
    }
    Ok(a.errors() as f64 / a.ref_len as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceWer {
    pub alignment: AlignmentResult,
    pub wer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WerReport {
    pub per_utterance: BTreeMap<String, UtteranceWer>,
    /// Total errors over total reference words.
    pub corpus_wer: f64,
    pub total_ref_words: usize,
}

impl WerReport {
    /// Aggregates `(utterance_id, reference, chosen words)` triples.
    pub fn from_choices<'a, I>(choices: I) -> Result<Self, WerError>
    where
        I: IntoIterator<Item = (&'a str, &'a [String], &'a [String])>,
    {
        let mut per_utterance = BTreeMap::new();
        let mut errors = 0usize;
        let mut total = 0usize;
        for (id, reference, chosen) in choices {
            let alignment = align(reference, chosen);
            let wer = utterance_wer(&alignment)
                .map_err(|_| WerError::EmptyReference(Some(id.to_string())))?;
            errors += alignment.errors();
            total += alignment.ref_len;
            if per_utterance
                .insert(id.to_string(), UtteranceWer { alignment, wer })
                .is_some()
            {
                return Err(WerError::DuplicateId(id.to_string()));
            }
        }
        let corpus_wer = if total == 0 { 0.0 } else { errors as f64 / total as f64 };
        Ok(WerReport {
            per_utterance,
            corpus_wer,
            total_ref_words: total,
        })
    }

    pub fn total_errors(&self) -> usize {
        self.per_utterance.values().map(|u| u.alignment.errors()).sum()
    }
}

fn reference_of(list: &NBestList) -> Result<&[String], WerError> {
    list.reference
        .as_deref()
        .ok_or_else(|| WerError::MissingReference(list.utterance_id.clone()))
}

/// Rank of the hypothesis with the fewest edit errors; ties go to the lowest rank.
pub fn oracle_select(list: &NBestList) -> Result<usize, WerError> {
    let reference = reference_of(list)?;
    let mut best: Option<(usize, usize)> = None;
    for h in &list.hypotheses {
        let e = align(reference, &h.words).errors();
        if best.is_none_or(|(be, _)| e < be) {
            best = Some((e, h.rank));
        }
    }
    best.map(|(_, r)| r)
        .ok_or_else(|| WerError::BadSelection { id: list.utterance_id.clone(), rank: 0, n: 0 })
}

/// Minimum achievable WER when the best hypothesis of every list is chosen.
pub fn oracle_wer(lists: &[NBestList]) -> Result<WerReport, WerError> {
    corpus_wer(lists, oracle_select)
}

/// Corpus WER of the hypotheses picked by `selector` (a 1-based rank per list).
pub fn corpus_wer<F>(lists: &[NBestList], mut selector: F) -> Result<WerReport, WerError>
where
    F: FnMut(&NBestList) -> Result<usize, WerError>,
{
    let mut chosen = Vec::with_capacity(lists.len());
    for list in lists {
        let reference = reference_of(list)?;
        let rank = selector(list)?;
        let hyp = list.get(rank).ok_or_else(|| WerError::BadSelection {
            id: list.utterance_id.clone(),
            rank,
            n: list.len(),
        })?;
        chosen.push((list.utterance_id.as_str(), reference, hyp.words.as_slice()));
    }
    WerReport::from_choices(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3_list() -> NBestList {
        NBestList::from_texts(
            "fig3",
            &[
                ("recognize speech with artificial intelligence.", -1.0),
                ("recognized speech with artificial intelligence.", -2.0),
                ("recognize speech with artificial intelligent.", -3.0),
                ("reckon eyes speech with artificial intelligence.", -4.0),
                ("recognize peach with artificial intelligence.", -5.0),
            ],
            Some("recognize speech with artificial intelligence"),
        )
        .unwrap()
    }

    #[test]
    fn utterance_wer_values() {
        let a = |s, i, d, r| AlignmentResult { substitutions: s, insertions: i, deletions: d, ref_len: r };
        assert_eq!(utterance_wer(&a(1, 0, 0, 5)).unwrap(), 0.2);
        assert_eq!(utterance_wer(&a(0, 0, 0, 7)).unwrap(), 0.0);
        assert_eq!(utterance_wer(&a(0, 3, 0, 3)).unwrap(), 1.0);
        assert_eq!(utterance_wer(&a(0, 2, 0, 0)), Err(WerError::EmptyReference(None)));
    }

    #[test]
    fn fig3_oracle_is_exact() {
        let report = oracle_wer(&[fig3_list()]).unwrap();
        assert_eq!(report.corpus_wer, 0.0);
        assert_eq!(oracle_select(&fig3_list()).unwrap(), 1);
    }

    #[test]
    fn oracle_picks_matching_rank() {
        let list = NBestList::from_texts("u", &[("a b x", -1.0), ("a x c", -2.0), ("a b c", -3.0)], Some("a b c")).unwrap();
        assert_eq!(oracle_select(&list).unwrap(), 3);
        assert_eq!(oracle_wer(&[list]).unwrap().per_utterance["u"].wer, 0.0);
    }

    #[test]
    fn oracle_ties_go_to_lowest_rank() {
        let list = NBestList::from_texts("u", &[("a b x", -1.0), ("a x c", -2.0)], Some("a b c")).unwrap();
        assert_eq!(oracle_select(&list).unwrap(), 1);
    }

    #[test]
    fn corpus_is_error_weighted() {
        let u1 = NBestList::from_texts("u1", &[("a b c d x", 0.0)], Some("a b c d e")).unwrap();
        let u2 = NBestList::from_texts("u2", &[("a b c d e", 0.0)], Some("a b c d e")).unwrap();
        let report = oracle_wer(&[u1, u2]).unwrap();
        assert!((report.corpus_wer - 0.1).abs() < 1e-12);
        assert_eq!(report.total_ref_words, 10);

        // Mean of per-utterance WERs would differ here: 1/1 and 0/4 -> 0.5 vs 1/5.
        let short = NBestList::from_texts("s", &[("x", 0.0)], Some("y")).unwrap();
        let long = NBestList::from_texts("l", &[("a b c d", 0.0)], Some("a b c d")).unwrap();
        assert!((oracle_wer(&[short, long]).unwrap().corpus_wer - 0.2).abs() < 1e-12);
    }

    #[test]
    fn selector_errors() {
        let list = fig3_list();
        let err = corpus_wer(std::slice::from_ref(&list), |_| Ok(6)).unwrap_err();
        assert_eq!(err, WerError::BadSelection { id: "fig3".into(), rank: 6, n: 5 });
        assert!(corpus_wer(std::slice::from_ref(&list), |_| Ok(0)).is_err());

        let mut no_ref = list;
        no_ref.reference = None;
        assert_eq!(oracle_wer(&[no_ref]).unwrap_err(), WerError::MissingReference("fig3".into()));
    }

    #[test]
    fn first_pass_and_exact_pick() {
        let list = fig3_list();
        let first = corpus_wer(std::slice::from_ref(&list), |_| Ok(1)).unwrap();
        assert_eq!(first.corpus_wer, 0.0);
        let fifth = corpus_wer(std::slice::from_ref(&list), |_| Ok(5)).unwrap();
        assert!((fifth.corpus_wer - 0.2).abs() < 1e-12);
    }

    #[test]
    fn empty_reference_names_utterance() {
        let list = NBestList::from_texts("empty", &[("a", 0.0)], Some("")).unwrap();
        assert_eq!(
            corpus_wer(&[list], |_| Ok(1)).unwrap_err(),
            WerError::EmptyReference(Some("empty".into()))
        );
    }
}
