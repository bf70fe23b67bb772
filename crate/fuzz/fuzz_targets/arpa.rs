#![no_main]

use libfuzzer_sys::fuzz_target;
use nbest_rescore::ngram::load_arpa;

fuzz_target!(|data: &[u8]| {
    let Ok(model) = load_arpa(data) else { return };
    let mut out = Vec::new();
    model.write_arpa(&mut out).unwrap();
    let back = load_arpa(out.as_slice()).expect("written models load");
    let mut again = Vec::new();
    back.write_arpa(&mut again).unwrap();
    assert_eq!(out, again);
    let words: Vec<&str> = model.vocab().take(6).collect();
    let _ = model.score_sequence(&words, true);
});
