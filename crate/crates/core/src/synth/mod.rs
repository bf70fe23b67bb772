//! Seeded word-level noisy channel that turns reference text into N-best lists.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::nbest::{Hypothesis, NBestList};
use crate::util::child_seed;

const MAX_RESAMPLES: usize = 100;

/// Where the reference itself goes in the generated list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferenceRank {
    #[default]
    Never,
    At(usize),
}

impl Serialize for ReferenceRank {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ReferenceRank::Never => s.serialize_str("never"),
            ReferenceRank::At(r) => s.serialize_u64(*r as u64),
        }
    }
}

impl<'de> Deserialize<'de> for ReferenceRank {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Rank(usize),
            Word(String),
            Null(()),
        }
        match Repr::deserialize(d)? {
            Repr::Rank(r) => Ok(ReferenceRank::At(r)),
            Repr::Word(w) if w == "never" => Ok(ReferenceRank::Never),
            Repr::Null(()) => Ok(ReferenceRank::Never),
            Repr::Word(w) => Err(serde::de::Error::custom(format!("expected a rank or \"never\", got {w:?}"))),
        }
    }
}

/// Missing fields take their `Default` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelConfig {
    pub sub_rate: f64,
    pub ins_rate: f64,
    pub del_rate: f64,
    /// Weighted substitutes per word, e.g. `{"speech": {"peach": 1.0}}`.
    pub confusion_table: BTreeMap<String, BTreeMap<String, f64>>,
    /// Pool for substitutions outside the table and for insertions. Empty
    /// means the words of the references themselves.
    pub vocabulary: Vec<String>,
    pub n: usize,
    pub include_reference_rank: ReferenceRank,
    pub seed: u64,
    pub score_noise_sigma: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            sub_rate: 0.1,
            ins_rate: 0.02,
            del_rate: 0.02,
            confusion_table: BTreeMap::new(),
            vocabulary: Vec::new(),
            n: 10,
            include_reference_rank: ReferenceRank::Never,
            seed: 0,
            score_noise_sigma: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("{name} = {value} is not a probability")]
    Rate { name: &'static str, value: f64 },
    #[error("sub_rate + del_rate = {0} exceeds 1")]
    RateSum(f64),
    #[error("list size must be at least 1")]
    ZeroN,
    #[error("reference rank {rank} outside 1..={n}")]
    ReferenceRank { rank: usize, n: usize },
    #[error("score_noise_sigma must be finite and non-negative, got {0}")]
    Sigma(f64),
    #[error("confusion weight for {word} -> {alt} must be positive and finite")]
    Weight { word: String, alt: String },
    #[error("reference {0} is empty")]
    EmptyReference(String),
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        for (name, value) in [("sub_rate", self.sub_rate), ("ins_rate", self.ins_rate), ("del_rate", self.del_rate)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SynthError::Rate { name, value });
            }
        }
        if self.sub_rate + self.del_rate > 1.0 {
            return Err(SynthError::RateSum(self.sub_rate + self.del_rate));
        }
        if self.n == 0 {
            return Err(SynthError::ZeroN);
        }
        if let ReferenceRank::At(rank) = self.include_reference_rank {
            if rank == 0 || rank > self.n {
                return Err(SynthError::ReferenceRank { rank, n: self.n });
            }
        }
        if !(self.score_noise_sigma.is_finite() && self.score_noise_sigma >= 0.0) {
            return Err(SynthError::Sigma(self.score_noise_sigma));
        }
        for (word, alts) in &self.confusion_table {
            for (alt, &w) in alts {
                if !(w.is_finite() && w > 0.0) {
                    return Err(SynthError::Weight { word: word.clone(), alt: alt.clone() });
                }
            }
        }
        Ok(())
    }
}

/// One generated list plus whether distinctness had to be given up.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub list: NBestList,
    pub duplicates: bool,
}

struct Channel<'a> {
    cfg: &'a ChannelConfig,
    pool: &'a [String],
    rng: ChaCha8Rng,
}

impl Channel<'_> {
    fn pick_from_pool(&mut self, avoid: Option<&str>) -> Option<String> {
        let candidates: Vec<&String> = self.pool.iter().filter(|w| Some(w.as_str()) != avoid).collect();
        if candidates.is_empty() {
            return None;
        }
        Some(candidates[self.rng.random_range(0..candidates.len())].clone())
    }

    fn substitute(&mut self, word: &str) -> Option<String> {
        if let Some(alts) = self.cfg.confusion_table.get(word) {
            let alts: Vec<(&String, f64)> = alts.iter().filter(|(a, _)| a.as_str() != word).map(|(a, &w)| (a, w)).collect();
            if !alts.is_empty() {
                let total: f64 = alts.iter().map(|(_, w)| w).sum();
                let mut x = self.rng.random::<f64>() * total;
                for (alt, w) in &alts {
                    if x < *w {
                        return Some((*alt).clone());
                    }
                    x -= w;
                }
                return Some(alts[alts.len() - 1].0.clone());
            }
        }
        self.pick_from_pool(Some(word))
    }

    /// A corrupted copy of `reference` and the number of edits applied.
    fn corrupt(&mut self, reference: &[String]) -> (Vec<String>, usize) {
        let mut out = Vec::with_capacity(reference.len() + 2);
        let mut edits = 0;
        for word in reference {
            let u: f64 = self.rng.random();
            if u < self.cfg.del_rate {
                edits += 1;
            } else if u < self.cfg.del_rate + self.cfg.sub_rate {
                match self.substitute(word) {
                    Some(alt) => {
                        out.push(alt);
                        edits += 1;
                    }
                    None => out.push(word.clone()),
                }
            } else {
                out.push(word.clone());
            }
            if self.rng.random::<f64>() < self.cfg.ins_rate {
                if let Some(extra) = self.pick_from_pool(None) {
                    out.push(extra);
                    edits += 1;
                }
            }
        }
        (out, edits)
    }

    fn score(&mut self, edits: usize) -> f64 {
        let z: f64 = self.rng.sample(StandardNormal);
        let base = -(edits as f64);
        if self.cfg.score_noise_sigma > 0.0 {
            base + self.cfg.score_noise_sigma * z
        } else {
            base
        }
    }
}

fn generate_with_pool(
    id: &str,
    reference: &[String],
    cfg: &ChannelConfig,
    seed: u64,
    pool: &[String],
) -> Result<Generated, SynthError> {
    cfg.validate()?;
    if reference.is_empty() {
        return Err(SynthError::EmptyReference(id.to_string()));
    }
    let mut ch = Channel { cfg, pool, rng: ChaCha8Rng::seed_from_u64(seed) };
    let include = match cfg.include_reference_rank {
        ReferenceRank::At(r) => Some(r),
        ReferenceRank::Never => None,
    };
    let wanted = cfg.n - usize::from(include.is_some());
    let mut seen: HashSet<Vec<String>> = HashSet::new();
    if include.is_some() {
        seen.insert(reference.to_vec());
    }
    let mut duplicates = false;
    let mut drawn: Vec<(Vec<String>, f64)> = Vec::with_capacity(cfg.n);
    for _ in 0..wanted {
        let mut attempt = 0;
        let (words, edits) = loop {
            let (words, edits) = ch.corrupt(reference);
            attempt += 1;
            if !words.is_empty() && seen.insert(words.clone()) {
                break (words, edits);
            }
            if attempt >= MAX_RESAMPLES && !words.is_empty() {
                duplicates = true;
                break (words, edits);
            }
            if attempt >= MAX_RESAMPLES * 2 {
                duplicates = true;
                break (reference.to_vec(), 0);
            }
        };
        let score = ch.score(edits);
        drawn.push((words, score));
    }
    drawn.sort_by(|a, b| b.1.total_cmp(&a.1));
    if let Some(rank) = include {
        let own = ch.score(0);
        let at = rank - 1;
        let upper = if at > 0 { drawn[at - 1].1 } else { f64::INFINITY };
        let lower = drawn.get(at).map_or(f64::NEG_INFINITY, |d| d.1);
        drawn.insert(at, (reference.to_vec(), own.min(upper).max(lower)));
    }
    let hypotheses = drawn
        .into_iter()
        .enumerate()
        .map(|(i, (words, score))| Hypothesis { words, score, rank: i + 1 })
        .collect();
    let list = NBestList {
        utterance_id: id.to_string(),
        hypotheses,
        reference: Some(reference.to_vec()),
    };
    Ok(Generated { list, duplicates })
}

fn distinct_words<'a>(refs: impl IntoIterator<Item = &'a [String]>) -> Vec<String> {
    refs.into_iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect()
}

/// N-best list for one reference, seeded by `cfg.seed`.
pub fn generate(id: &str, reference: &[String], cfg: &ChannelConfig) -> Result<Generated, SynthError> {
    let pool = if cfg.vocabulary.is_empty() { distinct_words([reference]) } else { cfg.vocabulary.clone() };
    generate_with_pool(id, reference, cfg, cfg.seed, &pool)
}

/// Provenance written next to a generated corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ChannelConfig,
    pub utterances: usize,
    /// How per-utterance seeds derive from `config.seed`.
    pub child_seed_rule: String,
    /// Utterances whose list contains repeated hypotheses.
    pub duplicates: Vec<String>,
}

/// Id of the utterance at `index`.
pub fn utterance_id(index: usize) -> String {
    format!("utt{index:05}")
}

/// One list per reference. Utterance `i` is named [`utterance_id`]`(i)` and
/// seeded from `(cfg.seed, i)` alone.
pub fn generate_corpus(references: &[Vec<String>], cfg: &ChannelConfig) -> Result<(Vec<NBestList>, Manifest), SynthError> {
    cfg.validate()?;
    let pool = if cfg.vocabulary.is_empty() {
        distinct_words(references.iter().map(Vec::as_slice))
    } else {
        cfg.vocabulary.clone()
    };
    let mut lists = Vec::with_capacity(references.len());
    let mut duplicates = Vec::new();
    for (i, reference) in references.iter().enumerate() {
        let id = utterance_id(i);
        let g = generate_with_pool(&id, reference, cfg, child_seed(cfg.seed, i as u64), &pool)?;
        if g.duplicates {
            duplicates.push(id);
        }
        lists.push(g.list);
    }
    let manifest = Manifest {
        config: cfg.clone(),
        utterances: lists.len(),
        child_seed_rule: "splitmix64(splitmix64(seed) xor index)".into(),
        duplicates,
    };
    Ok((lists, manifest))
}
