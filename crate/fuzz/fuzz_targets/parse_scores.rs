#![no_main]

use libfuzzer_sys::fuzz_target;
use nbest_rescore::response::{parse_scores, OutputKind};

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let n = usize::from(n % 16);
    if let Ok(p) = parse_scores(text, n) {
        match p.kind {
            OutputKind::Scores(s) => assert!(s.len() == n && s.iter().all(|v| v.is_finite())),
            other => panic!("scores parser returned {other:?}"),
        }
    }
});
