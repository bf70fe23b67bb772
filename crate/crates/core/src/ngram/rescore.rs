use crate::nbest::NBestList;
use crate::pipeline::{select_fused, FusionConfig};

use super::{NgramModel, ScoreError};

/// Natural-log LM score (with sentence markers) for every hypothesis.
pub fn ngram_scores_ln(list: &NBestList, lm: &NgramModel) -> Result<Vec<f64>, ScoreError> {
    list.hypotheses.iter().map(|h| lm.score_ln(&h.words, true)).collect()
}

/// Chosen rank per list under shallow fusion with the n-gram model.
pub fn ngram_rescore(lists: &[NBestList], lm: &NgramModel, fusion: &FusionConfig) -> Result<Vec<usize>, ScoreError> {
    lists
        .iter()
        .map(|list| {
            let scores = ngram_scores_ln(list, lm)?;
            Ok(select_fused(list, &scores, fusion, None))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ngram::OovPolicy;

    fn model() -> NgramModel {
        "\\data\\\nngram 1=5\nngram 2=2\n\n\\1-grams:\n-99\t<s>\t0\n-0.6\t</s>\n-0.5\ta\t-0.1\n-0.7\tb\t-0.1\n-2\t<unk>\n\n\\2-grams:\n-0.3\t<s> a\n-0.2\ta b\n\n\\end\\\n"
            .parse()
            .unwrap()
    }

    #[test]
    fn zero_lambda_is_acoustic_argmax() {
        // Scores deliberately not sorted by rank.
        let list = NBestList::from_texts("u", &[("a b", -3.0), ("b a", -1.0), ("a", -2.0)], None).unwrap();
        let cfg = FusionConfig { lambda_lm: 0.0, use_acoustic: true };
        assert_eq!(ngram_rescore(&[list], &model(), &cfg).unwrap(), vec![2]);
    }

    #[test]
    fn lm_breaks_acoustic_tie() {
        let list = NBestList::from_texts("u", &[("b a", -1.0), ("a b", -1.0)], None).unwrap();
        for lambda in [1e-6, 0.1, 1.0, 50.0] {
            let cfg = FusionConfig { lambda_lm: lambda, use_acoustic: true };
            assert_eq!(ngram_rescore(std::slice::from_ref(&list), &model(), &cfg).unwrap(), vec![2]);
        }
    }

    #[test]
    fn oov_handling() {
        let list = NBestList::from_texts("u", &[("a zebra", -1.0)], None).unwrap();
        let cfg = FusionConfig::default();
        let err = ngram_rescore(std::slice::from_ref(&list), &model(), &cfg).unwrap_err();
        assert_eq!(err, ScoreError::Oov(vec!["zebra".into()]));
        let lenient = model().with_oov_policy(OovPolicy::MapToUnk);
        assert_eq!(ngram_rescore(&[list], &lenient, &cfg).unwrap(), vec![1]);
    }
}
