#![no_main]

use libfuzzer_sys::fuzz_target;
use nbest_rescore::nbest::NormConfig;
use nbest_rescore::response::{parse_selection, OutputKind};
use nbest_rescore::NBestList;

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let n = 1 + usize::from(n % 12);
    let texts: Vec<String> = (0..n).map(|i| format!("show me flights {i}")).collect();
    let pairs: Vec<(&str, f64)> = texts.iter().map(|t| (t.as_str(), 0.0)).collect();
    let list = NBestList::from_texts("fuzz", &pairs, None).unwrap();
    if let Ok(p) = parse_selection(text, &list, &NormConfig::default()) {
        match p.kind {
            OutputKind::Selection(k) => assert!((1..=n).contains(&k)),
            other => panic!("selection parser returned {other:?}"),
        }
    }
});
