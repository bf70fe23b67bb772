#![no_main]

use libfuzzer_sys::fuzz_target;
use nbest_rescore::prompt::{Placeholder, Template, Values};

fuzz_target!(|text: &str| {
    let Ok(t) = Template::parse("fuzz", text) else { return };
    let values = Placeholder::ALL.into_iter().fold(Values::new(), |v, p| v.set(p, "{{n}}"));
    let rendered = t.render(&values).expect("every placeholder has a value");
    assert!(t.placeholders().next().is_some() || rendered == text);
});
