use std::collections::HashMap;
use std::io::BufRead;

use super::{Entry, NgramModel, OovPolicy, OrderTable};

#[derive(Debug, thiserror::Error)]
pub enum ArpaError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("unterminated model (missing \\end\\)")]
    Unterminated,
    #[error("line {line}: read failed: {source}")]
    Io { line: usize, source: std::io::Error },
}

fn bad(line: usize, message: impl Into<String>) -> ArpaError {
    ArpaError::Malformed { line, message: message.into() }
}

enum State {
    Preamble,
    Header,
    Between,
    Section(usize),
    Done,
}

struct Builder {
    declared: Vec<usize>,
    tables: Vec<OrderTable>,
    seen_sections: usize,
    vocab: Vec<String>,
    word_ids: HashMap<String, u32>,
}

impl Builder {
    fn close_section(&self, order: usize, line: usize) -> Result<(), ArpaError> {
        let found = self.tables[order - 1].len();
        let want = self.declared[order - 1];
        if found != want {
            return Err(bad(
                line,
                format!("{order}-gram section has {found} entries, header declares {want}"),
            ));
        }
        Ok(())
    }

    fn add_entry(&mut self, order: usize, text: &str, line: usize) -> Result<(), ArpaError> {
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != order + 1 && fields.len() != order + 2 {
            return Err(bad(line, format!("expected {} or {} fields for a {order}-gram", order + 1, order + 2)));
        }
        let number = |s: &str| -> Result<f64, ArpaError> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(line, format!("non-numeric field {s:?}")))
        };
        let log10_prob = number(fields[0])?;
        if log10_prob > 0.0 {
            return Err(bad(line, format!("log probability {log10_prob} is positive")));
        }
        let log10_backoff = fields.get(order + 1).map(|s| number(s)).transpose()?;
        let words = &fields[1..=order];

        let mut key = Vec::with_capacity(order);
        for w in words {
            let id = match self.word_ids.get(*w) {
                Some(&id) => id,
                None if order == 1 => {
                    let id = self.vocab.len() as u32;
                    self.vocab.push(w.to_string());
                    self.word_ids.insert(w.to_string(), id);
                    id
                }
                None => return Err(bad(line, format!("word {w:?} has no unigram entry"))),
            };
            key.push(id);
        }
        if order > 1 && !self.tables[order - 2].index.contains_key(&key[..order - 1]) {
            return Err(bad(
                line,
                format!("dangling prefix: {:?} is not a stored {}-gram", words[..order - 1].join(" "), order - 1),
            ));
        }
        let table = &mut self.tables[order - 1];
        let key: Box<[u32]> = key.into();
        if table.index.contains_key(&key) {
            return Err(bad(line, format!("duplicate {order}-gram {:?}", words.join(" "))));
        }
        if table.len() >= self.declared[order - 1] {
            return Err(bad(line, format!("more {order}-grams than the header declares")));
        }
        table.index.insert(key.clone(), table.len());
        table.keys.push(key);
        table.entries.push(Entry { log10_prob, log10_backoff });
        Ok(())
    }
}

fn parse_count(text: &str, line: usize) -> Result<(usize, usize), ArpaError> {
    let rest = text
        .strip_prefix("ngram")
        .ok_or_else(|| bad(line, "expected `ngram N=count` in header"))?;
    let (order, count) = rest
        .trim()
        .split_once('=')
        .ok_or_else(|| bad(line, "expected `ngram N=count` in header"))?;
    let order: usize = order.trim().parse().map_err(|_| bad(line, format!("bad order {order:?}")))?;
    let count: usize = count.trim().parse().map_err(|_| bad(line, format!("bad count {count:?}")))?;
    Ok((order, count))
}

fn section_order(text: &str) -> Option<usize> {
    text.strip_prefix('\\')?.strip_suffix("-grams:")?.parse().ok()
}

/// Parses ARPA text (LF or CRLF line endings).
pub fn load_arpa<R: BufRead>(reader: R) -> Result<NgramModel, ArpaError> {
    let mut state = State::Preamble;
    let mut b = Builder {
        declared: Vec::new(),
        tables: Vec::new(),
        seen_sections: 0,
        vocab: Vec::new(),
        word_ids: HashMap::new(),
    };
    let mut lineno = 0;

    for raw in reader.lines() {
        lineno += 1;
        let raw = raw.map_err(|source| ArpaError::Io { line: lineno, source })?;
        let text = raw.trim();

        state = match state {
            State::Preamble if text == "\\data\\" => State::Header,
            State::Preamble => State::Preamble,
            State::Header if text.is_empty() && b.declared.is_empty() => State::Header,
            State::Header if text.starts_with("ngram") => {
                let (order, count) = parse_count(text, lineno)?;
                if order != b.declared.len() + 1 {
                    return Err(bad(lineno, format!("header declares order {order} out of sequence")));
                }
                b.declared.push(count);
                b.tables.push(OrderTable::default());
                State::Header
            }
            State::Header | State::Between if text.is_empty() => State::Between,
            State::Header | State::Between => {
                if b.declared.is_empty() {
                    return Err(bad(lineno, "header declares no n-gram orders"));
                }
                if text == "\\end\\" {
                    if b.seen_sections != b.declared.len() {
                        return Err(bad(
                            lineno,
                            format!("missing {}-gram section", b.seen_sections + 1),
                        ));
                    }
                    State::Done
                } else {
                    let order = section_order(text)
                        .ok_or_else(|| bad(lineno, format!("unexpected line {text:?}")))?;
                    if order != b.seen_sections + 1 || order > b.declared.len() {
                        return Err(bad(lineno, format!("unexpected {order}-gram section")));
                    }
                    b.seen_sections = order;
                    State::Section(order)
                }
            }
            State::Section(order) if text.is_empty() => {
                b.close_section(order, lineno)?;
                State::Between
            }
            State::Section(order) if text.starts_with('\\') => {
                b.close_section(order, lineno)?;
                if text == "\\end\\" {
                    if b.seen_sections != b.declared.len() {
                        return Err(bad(lineno, format!("missing {}-gram section", order + 1)));
                    }
                    State::Done
                } else {
                    let next = section_order(text)
                        .ok_or_else(|| bad(lineno, format!("unexpected line {text:?}")))?;
                    if next != order + 1 || next > b.declared.len() {
                        return Err(bad(lineno, format!("unexpected {next}-gram section")));
                    }
                    b.seen_sections = next;
                    State::Section(next)
                }
            }
            State::Section(order) => {
                b.add_entry(order, text, lineno)?;
                State::Section(order)
            }
            State::Done => break,
        };
    }

    match state {
        State::Done => Ok(NgramModel {
            vocab: b.vocab,
            word_ids: b.word_ids,
            tables: b.tables,
            oov: OovPolicy::Error,
        }),
        _ => Err(ArpaError::Unterminated),
    }
}

impl std::str::FromStr for NgramModel {
    type Err = ArpaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        load_arpa(s.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "\\data\\\nngram 1=2\nngram 2=1\n\n\\1-grams:\n-0.5\ta\t0\n-0.7\tb\n\n\\2-grams:\n-0.2\ta b\n\n\\end\\\n";

    fn line_of(err: ArpaError) -> usize {
        match err {
            ArpaError::Malformed { line, .. } => line,
            other => panic!("expected malformed, got {other:?}"),
        }
    }

    #[test]
    fn unigram_only() {
        let m: NgramModel = "\\data\\\nngram 1=2\n\n\\1-grams:\n-0.5\ta\n-0.7\tb\n\n\\end\\\n".parse().unwrap();
        assert_eq!(m.max_order(), 1);
        assert_eq!(m.entry(&["b"]).unwrap().log10_prob, -0.7);
    }

    #[test]
    fn toy_model_with_crlf() {
        let m: NgramModel = TOY.replace('\n', "\r\n").parse().unwrap();
        assert_eq!(m.max_order(), 2);
        assert_eq!(m.count(2), 1);
        assert_eq!(m.entry(&["a"]).unwrap().log10_backoff, Some(0.0));
    }

    #[test]
    fn count_mismatch_reported_at_section_end() {
        let text = "\\data\\\nngram 1=2\nngram 2=3\n\n\\1-grams:\n-0.5\ta\n-0.7\tb\n\n\\2-grams:\n-0.2\ta b\n-0.3\tb a\n\n\\end\\\n";
        let err = text.parse::<NgramModel>().unwrap_err();
        assert!(err.to_string().contains("header declares 3"), "{err}");
        assert_eq!(line_of(err), 12);
    }

    #[test]
    fn missing_end_is_unterminated() {
        let text = TOY.replace("\\end\\\n", "");
        let err = text.parse::<NgramModel>().unwrap_err();
        assert!(matches!(err, ArpaError::Unterminated));
        assert_eq!(err.to_string(), "unterminated model (missing \\end\\)");
        assert!(matches!("".parse::<NgramModel>(), Err(ArpaError::Unterminated)));
    }

    #[test]
    fn rejects_dangling_prefix() {
        let text = "\\data\\\nngram 1=2\nngram 2=1\n\n\\1-grams:\n-0.5\ta\n-0.7\tb\n\n\\2-grams:\n-0.2\ta b\n\n\\3-grams:\n\n\\end\\\n";
        assert!(text.parse::<NgramModel>().is_err());
        let text = "\\data\\\nngram 1=2\nngram 2=1\nngram 3=1\n\n\\1-grams:\n-0.5\ta\n-0.7\tb\n\n\\2-grams:\n-0.2\ta b\n\n\\3-grams:\n-0.1\tb a b\n\n\\end\\\n";
        let err = text.parse::<NgramModel>().unwrap_err();
        assert!(err.to_string().contains("dangling prefix"), "{err}");
        assert_eq!(line_of(err), 14);
    }

    #[test]
    fn rejects_bad_fields() {
        let non_numeric = TOY.replace("-0.7\tb", "abc\tb");
        assert_eq!(line_of(non_numeric.parse::<NgramModel>().unwrap_err()), 7);
        let positive = TOY.replace("-0.7\tb", "0.3\tb");
        assert!(positive.parse::<NgramModel>().is_err());
        let unknown = TOY.replace("-0.2\ta b", "-0.2\ta c");
        assert!(unknown.parse::<NgramModel>().unwrap_err().to_string().contains("no unigram"));
        let header = TOY.replace("ngram 2=1", "ngram two=1");
        assert_eq!(line_of(header.parse::<NgramModel>().unwrap_err()), 3);
        let nan = TOY.replace("\ta\t0", "\ta\tNaN");
        assert!(nan.parse::<NgramModel>().is_err());
    }

    #[test]
    fn accepts_bos_placeholder() {
        let text = "\\data\\\nngram 1=2\n\n\\1-grams:\n-99\t<s>\t-0.3\n-0.1\t</s>\n\n\\end\\\n";
        let m: NgramModel = text.parse().unwrap();
        assert_eq!(m.entry(&["<s>"]).unwrap().log10_prob, -99.0);
    }
}
