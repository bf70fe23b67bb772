use serde::{Deserialize, Serialize};

use crate::nbest::NBestList;

/// Linear combination of first-pass and language-model scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub lambda_lm: f64,
    pub use_acoustic: bool,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig { lambda_lm: 1.0, use_acoustic: true }
    }
}

/// Both scores are natural-log.
pub fn fuse(acoustic: f64, lm: f64, cfg: &FusionConfig) -> f64 {
    let base = if cfg.use_acoustic { acoustic } else { 0.0 };
    base + cfg.lambda_lm * lm
}

/// Rank with the highest fused score. Exact ties go to `prefer` when it is
/// among the tied candidates, otherwise to the lowest rank.
pub fn select_fused(list: &NBestList, lm: &[f64], cfg: &FusionConfig, prefer: Option<usize>) -> usize {
    debug_assert_eq!(list.len(), lm.len());
    let fused: Vec<f64> = list
        .hypotheses
        .iter()
        .zip(lm)
        .map(|(h, &l)| fuse(h.score, l, cfg))
        .collect();
    let mut best = 0;
    for (i, &v) in fused.iter().enumerate().skip(1) {
        if v > fused[best] {
            best = i;
        }
    }
    if let Some(p) = prefer.and_then(|r| r.checked_sub(1)) {
        if fused.get(p) == Some(&fused[best]) {
            return p + 1;
        }
    }
    best + 1
}
