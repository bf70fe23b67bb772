//! Hypotheses-to-transcription loss and the expected-error diagnostic.

use crate::nbest::{edit_errors, Hypothesis, NBestList};
use crate::ngram::{NgramModel, LN_10};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LossError {
    #[error("utterance {0} has no reference")]
    MissingReference(String),
    #[error("zero-length reference")]
    EmptyReference,
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("probability for hypothesis {rank} is {value}, outside (0, 1]")]
    BadProbability { rank: usize, value: f64 },
    #[error("posterior sums to {0}, not 1")]
    NotNormalized(f64),
    #[error("posterior entry {0} is negative or not finite")]
    BadPosterior(f64),
    #[error("lambda must be finite and non-negative, got {0}")]
    BadLambda(f64),
    #[error("probability source: {0}")]
    Source(String),
}

/// P(y* | x_i): probability of the reference transcription given one hypothesis.
pub trait SequenceProbability {
    fn probability(&self, list: &NBestList, hyp: &Hypothesis, reference: &[String]) -> Result<f64, LossError>;
}

/// Fixed probabilities indexed by rank.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedProbabilities(pub Vec<f64>);

impl SequenceProbability for FixedProbabilities {
    fn probability(&self, list: &NBestList, hyp: &Hypothesis, _: &[String]) -> Result<f64, LossError> {
        self.0
            .get(hyp.rank - 1)
            .copied()
            .ok_or(LossError::LengthMismatch { expected: list.len(), got: self.0.len() })
    }
}

/// n-gram probability of the reference (plus `</s>`) continuing the hypothesis.
#[derive(Debug, Clone, Copy)]
pub struct NgramConditional<'a>(pub &'a NgramModel);

impl SequenceProbability for NgramConditional<'_> {
    fn probability(&self, _: &NBestList, hyp: &Hypothesis, reference: &[String]) -> Result<f64, LossError> {
        let mut target: Vec<&str> = reference.iter().map(String::as_str).collect();
        target.push(crate::ngram::EOS);
        let log10 = self
            .0
            .score_continuation(&hyp.words, &target)
            .map_err(|e| LossError::Source(e.to_string()))?;
        Ok((log10 * LN_10).exp())
    }
}

pub struct H2TConfig<'a> {
    /// Weight of the squared-error term.
    pub lambda_mse: f64,
    pub prob_source: &'a dyn SequenceProbability,
}

impl<'a> H2TConfig<'a> {
    pub const DEFAULT_LAMBDA: f64 = 0.01;

    pub fn new(prob_source: &'a dyn SequenceProbability) -> Self {
        H2TConfig { lambda_mse: Self::DEFAULT_LAMBDA, prob_source }
    }
}

/// Softmax of the first-pass scores within the list.
pub fn first_pass_posterior(list: &NBestList) -> Vec<f64> {
    let max = list.hypotheses.iter().map(|h| h.score).fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = list.hypotheses.iter().map(|h| (h.score - max).exp()).collect();
    let z: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / z).collect()
}

/// `Σ_i [ -ln P_i + λ (s_i - P_i)^2 ]`, natural log.
pub fn h2t_loss_from(probs: &[f64], posteriors: &[f64], lambda_mse: f64) -> Result<f64, LossError> {
    if !(lambda_mse.is_finite() && lambda_mse >= 0.0) {
        return Err(LossError::BadLambda(lambda_mse));
    }
    if probs.len() != posteriors.len() {
        return Err(LossError::LengthMismatch { expected: probs.len(), got: posteriors.len() });
    }
    let mut total = 0.0;
    for (i, (&p, &s)) in probs.iter().zip(posteriors).enumerate() {
        if !(p > 0.0 && p <= 1.0) {
            return Err(LossError::BadProbability { rank: i + 1, value: p });
        }
        if !s.is_finite() {
            return Err(LossError::BadPosterior(s));
        }
        total += -p.ln() + lambda_mse * (s - p).powi(2);
    }
    Ok(total)
}

/// H2T loss of one list, with posteriors from [`first_pass_posterior`].
pub fn h2t_loss(list: &NBestList, cfg: &H2TConfig<'_>) -> Result<f64, LossError> {
    let reference = list
        .reference
        .as_deref()
        .ok_or_else(|| LossError::MissingReference(list.utterance_id.clone()))?;
    let probs = list
        .hypotheses
        .iter()
        .map(|h| cfg.prob_source.probability(list, h, reference))
        .collect::<Result<Vec<_>, _>>()?;
    h2t_loss_from(&probs, &first_pass_posterior(list), cfg.lambda_mse)
}

/// `Σ_i posterior_i · errors(ref, hyp_i) / |ref|`.
pub fn expected_wer(list: &NBestList, posterior: &[f64]) -> Result<f64, LossError> {
    let reference = list
        .reference
        .as_deref()
        .ok_or_else(|| LossError::MissingReference(list.utterance_id.clone()))?;
    if reference.is_empty() {
        return Err(LossError::EmptyReference);
    }
    if posterior.len() != list.len() {
        return Err(LossError::LengthMismatch { expected: list.len(), got: posterior.len() });
    }
    if let Some(&bad) = posterior.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(LossError::BadPosterior(bad));
    }
    let sum: f64 = posterior.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(LossError::NotNormalized(sum));
    }
    let errors: f64 = list
        .hypotheses
        .iter()
        .zip(posterior)
        .map(|(h, p)| p * edit_errors(reference, &h.words) as f64)
        .sum();
    Ok(errors / reference.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_examples() {
        assert_eq!(h2t_loss_from(&[1.0], &[1.0], 0.01).unwrap(), 0.0);
        assert!((h2t_loss_from(&[0.5], &[0.5], 0.01).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
        let v = h2t_loss_from(&[0.5, 0.25], &[0.5, 0.5], 0.01).unwrap();
        assert!((v - (3.0 * std::f64::consts::LN_2 + 0.000625)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(h2t_loss_from(&[0.0], &[1.0], 0.01), Err(LossError::BadProbability { .. })));
        assert!(matches!(h2t_loss_from(&[1.5], &[1.0], 0.01), Err(LossError::BadProbability { .. })));
        assert!(matches!(h2t_loss_from(&[0.5], &[1.0], -1.0), Err(LossError::BadLambda(_))));
        assert!(h2t_loss_from(&[0.5], &[], 0.01).is_err());
    }

    #[test]
    fn softmax_posterior_for_singleton() {
        let list = NBestList::from_texts("u", &[("a b", -3.0)], Some("a b")).unwrap();
        assert_eq!(first_pass_posterior(&list), vec![1.0]);
        let probs = FixedProbabilities(vec![1.0]);
        let cfg = H2TConfig::new(&probs);
        assert_eq!(h2t_loss(&list, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn expected_wer_examples() {
        let list = NBestList::from_texts(
            "u",
            &[("a b c d e", -1.0), ("a b c d x", -2.0)],
            Some("a b c d e"),
        )
        .unwrap();
        assert_eq!(expected_wer(&list, &[0.0, 1.0]).unwrap(), 0.2);
        assert!((expected_wer(&list, &[0.5, 0.5]).unwrap() - 0.1).abs() < 1e-12);
        let swapped = NBestList::from_texts("u", &[("a b c d x", -1.0), ("a b c d e", -2.0)], Some("a b c d e")).unwrap();
        assert!((expected_wer(&swapped, &[0.9, 0.1]).unwrap() - 0.18).abs() < 1e-12);
        assert!(matches!(expected_wer(&list, &[0.5, 0.4]), Err(LossError::NotNormalized(_))));
    }
}
