#![no_main]

use libfuzzer_sys::fuzz_target;
use nbest_rescore::nbest::{read_jsonl, write_jsonl, NormConfig};

fuzz_target!(|data: &[u8]| {
    let norm = NormConfig::default();
    let Ok(lists) = read_jsonl(data, &norm) else { return };
    let mut out = Vec::new();
    write_jsonl(&mut out, &lists).unwrap();
    let back = read_jsonl(out.as_slice(), &norm).expect("written lists load");
    assert_eq!(lists.len(), back.len());
    for (a, b) in lists.iter().zip(&back) {
        assert_eq!(a.utterance_id, b.utterance_id);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.hypotheses.iter().zip(&b.hypotheses) {
            assert_eq!(x.score.to_bits(), y.score.to_bits());
        }
    }
});
