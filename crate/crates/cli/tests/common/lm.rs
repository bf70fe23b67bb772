//! Absolute-discount backoff n-gram estimator that writes ARPA text, plus a
//! scorer that evaluates the same model straight from the counts.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;

const BOS: &str = "<s>";
const EOS: &str = "</s>";
const UNK: &str = "<unk>";

pub struct CountModel {
    order: usize,
    discount: f64,
    /// `counts[k - 1]` holds every k-gram seen in training.
    counts: Vec<BTreeMap<Vec<String>, u64>>,
    /// Per history: (total continuations, distinct continuations), by order of the n-gram it predicts.
    contexts: Vec<HashMap<Vec<String>, (u64, u64)>>,
    vocab: BTreeSet<String>,
    tokens: u64,
    bow_cache: RefCell<HashMap<Vec<String>, f64>>,
}

impl CountModel {
    pub fn train(sentences: &[Vec<String>], order: usize, discount: f64) -> Self {
        let mut counts = vec![BTreeMap::new(); order];
        let mut vocab = BTreeSet::from([EOS.to_string(), UNK.to_string()]);
        let mut tokens = 0;
        for s in sentences {
            let mut padded = vec![BOS.to_string()];
            padded.extend(s.iter().cloned());
            padded.push(EOS.to_string());
            for i in 1..padded.len() {
                vocab.insert(padded[i].clone());
                tokens += 1;
                for k in 1..=order.min(i + 1) {
                    *counts[k - 1].entry(padded[i + 1 - k..=i].to_vec()).or_insert(0) += 1;
                }
            }
        }
        let mut contexts = vec![HashMap::new(); order];
        for k in 2..=order {
            for (gram, &c) in &counts[k - 1] {
                let e = contexts[k - 1].entry(gram[..k - 1].to_vec()).or_insert((0, 0));
                e.0 += c;
                e.1 += 1;
            }
        }
        CountModel { order, discount, counts, contexts, vocab, tokens, bow_cache: RefCell::new(HashMap::new()) }
    }

    pub fn in_vocab(&self, w: &str) -> bool {
        self.vocab.contains(w)
    }

    pub fn vocab_words(&self) -> impl Iterator<Item = &str> {
        self.vocab.iter().map(String::as_str).filter(|w| *w != EOS && *w != UNK)
    }

    fn unigram(&self, w: &str) -> f64 {
        let c = self.counts[0].get(&vec![w.to_string()]).copied().unwrap_or(0);
        (c as f64 + 1.0) / (self.tokens + self.vocab.len() as u64) as f64
    }

    fn stored(&self, hist: &[String], w: &str) -> Option<f64> {
        let k = hist.len() + 1;
        let mut gram = hist.to_vec();
        gram.push(w.to_string());
        let c = *self.counts[k - 1].get(&gram)?;
        let (total, _) = self.contexts[k - 1][hist];
        Some((c as f64 - self.discount) / total as f64)
    }

    /// Backoff weight of a history; 1 for histories never seen as a context.
    fn bow(&self, hist: &[String]) -> f64 {
        let k = hist.len() + 1;
        let Some(&(total, distinct)) = self.contexts[k - 1].get(hist) else {
            return 1.0;
        };
        if let Some(&v) = self.bow_cache.borrow().get(hist) {
            return v;
        }
        let left = self.discount * distinct as f64 / total as f64;
        let covered: f64 = self.counts[k - 1]
            .range(hist.to_vec()..)
            .take_while(|(g, _)| g[..k - 1] == *hist)
            .map(|(g, _)| self.prob(&hist[1..], &g[k - 1]))
            .sum();
        let v = left / (1.0 - covered);
        self.bow_cache.borrow_mut().insert(hist.to_vec(), v);
        v
    }

    /// P(w | hist) under the backoff model.
    pub fn prob(&self, hist: &[String], w: &str) -> f64 {
        let w = if self.vocab.contains(w) { w } else { UNK };
        let hist = &hist[hist.len().saturating_sub(self.order - 1)..];
        if hist.is_empty() {
            return self.unigram(w);
        }
        match self.stored(hist, w) {
            Some(p) => p,
            None => self.bow(hist) * self.prob(&hist[1..], w),
        }
    }

    /// log10 of the sentence with `<s>` context and a final `</s>`.
    pub fn log10_sentence(&self, words: &[String]) -> f64 {
        let mut padded = vec![BOS.to_string()];
        padded.extend(words.iter().map(|w| if self.vocab.contains(w) { w.clone() } else { UNK.to_string() }));
        padded.push(EOS.to_string());
        (1..padded.len()).map(|i| self.prob(&padded[..i], &padded[i]).log10()).sum()
    }

    pub fn to_arpa(&self) -> String {
        let mut unigrams: Vec<String> = self.vocab.iter().cloned().collect();
        unigrams.push(BOS.to_string());
        unigrams.sort();
        let mut out = String::from("\\data\\\n");
        writeln!(out, "ngram 1={}", unigrams.len()).unwrap();
        for k in 2..=self.order {
            writeln!(out, "ngram {k}={}", self.counts[k - 1].len()).unwrap();
        }
        let backoff = |gram: &[String]| -> String {
            if gram.len() < self.order && self.contexts[gram.len()].contains_key(gram) {
                format!("\t{}", self.bow(gram).log10())
            } else {
                String::new()
            }
        };
        out.push_str("\n\\1-grams:\n");
        for w in &unigrams {
            let p = if w == BOS { "-99".to_string() } else { self.unigram(w).log10().to_string() };
            writeln!(out, "{p}\t{w}{}", backoff(std::slice::from_ref(w))).unwrap();
        }
        for k in 2..=self.order {
            writeln!(out, "\n\\{k}-grams:").unwrap();
            for gram in self.counts[k - 1].keys() {
                let p = self.stored(&gram[..k - 1], &gram[k - 1]).unwrap();
                writeln!(out, "{}\t{}{}", p.log10(), gram.join(" "), backoff(gram)).unwrap();
            }
        }
        out.push_str("\n\\end\\\n");
        out
    }
}
