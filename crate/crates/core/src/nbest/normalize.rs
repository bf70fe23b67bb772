use serde::{Deserialize, Serialize};

/// Text normalization policy applied before any WER comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormConfig {
    pub lowercase: bool,
    /// Characters deleted outright (not replaced by a space).
    pub strip: String,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig {
            lowercase: true,
            strip: ".,?!;:\"".to_string(),
        }
    }
}

/// Lowercases, deletes the configured punctuation and splits on whitespace.
pub fn normalize(raw: &str, cfg: &NormConfig) -> Vec<String> {
    let cleaned: String = raw.chars().filter(|c| !cfg.strip.contains(*c)).collect();
    let cased = if cfg.lowercase {
        cleaned.to_lowercase()
    } else {
        cleaned
    };
    cased.split_whitespace().map(str::to_string).collect()
}
