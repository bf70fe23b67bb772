#![no_main]

use libfuzzer_sys::fuzz_target;
use nbest_rescore::nbest::NormConfig;
use nbest_rescore::response::{parse_correction, OutputKind};

fuzz_target!(|text: &str| {
    if let Ok(p) = parse_correction(text, &NormConfig::default()) {
        assert!(matches!(p.kind, OutputKind::Correction(ref w) if !w.is_empty()));
    }
});
