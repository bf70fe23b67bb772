use nbest_rescore::synth::{generate, generate_corpus, ChannelConfig, ReferenceRank};
use proptest::prelude::*;

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

#[test]
fn substitution_rate_is_calibrated() {
    let p = 0.3;
    let refs: Vec<Vec<String>> = (0..1250).map(|i| words(&format!("w{} w{} x y z q r s", i % 13, i % 17))).collect();
    let cfg = ChannelConfig {
        sub_rate: p,
        ins_rate: 0.0,
        del_rate: 0.0,
        n: 1,
        include_reference_rank: ReferenceRank::Never,
        score_noise_sigma: 0.0,
        seed: 2024,
        ..ChannelConfig::default()
    };
    let (lists, _) = generate_corpus(&refs, &cfg).unwrap();
    let (mut subs, mut total) = (0usize, 0usize);
    for l in &lists {
        let r = l.reference.as_ref().unwrap();
        let h = &l.hypotheses[0].words;
        assert_eq!(h.len(), r.len());
        subs += r.iter().zip(h).filter(|(a, b)| a != b).count();
        total += r.len();
        assert_eq!(l.hypotheses[0].score, -(r.iter().zip(h).filter(|(a, b)| a != b).count() as f64));
    }
    assert!(total >= 10_000);
    let rate = subs as f64 / total as f64;
    let tol = 3.0 * (p * (1.0 - p) / total as f64).sqrt();
    assert!((rate - p).abs() <= tol, "rate {rate} vs {p} +- {tol}");
}

#[test]
fn child_seeds_make_prefixes_stable() {
    let refs: Vec<Vec<String>> = (0..30).map(|i| words(&format!("fly from a{i} to b{i}"))).collect();
    let cfg = ChannelConfig { seed: 77, ..ChannelConfig::default() };
    let (all, _) = generate_corpus(&refs, &cfg).unwrap();
    let (prefix, _) = generate_corpus(&refs[..10], &ChannelConfig { vocabulary: all_words(&refs), ..cfg.clone() }).unwrap();
    let (full_vocab, _) = generate_corpus(&refs, &ChannelConfig { vocabulary: all_words(&refs), ..cfg }).unwrap();
    assert_eq!(prefix[..], full_vocab[..10]);
    assert_eq!(all.len(), 30);
}

fn all_words(refs: &[Vec<String>]) -> Vec<String> {
    let mut v: Vec<String> = refs.iter().flatten().cloned().collect();
    v.sort();
    v.dedup();
    v
}

#[test]
fn json_round_trip_of_config() {
    let text = r#"{"sub_rate":0.1,"ins_rate":0.0,"del_rate":0.0,"n":3,"include_reference_rank":"never",
                   "confusion_table":{"speech":{"peach":2.0,"beach":1.0}},"seed":4,"score_noise_sigma":0.25}"#;
    let cfg: ChannelConfig = serde_json::from_str(text).unwrap();
    assert_eq!(cfg.confusion_table["speech"]["peach"], 2.0);
    let back: ChannelConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(back, cfg);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lists_are_well_formed(
        seed in any::<u64>(),
        n in 1usize..12,
        sub in 0.0f64..0.5,
        del in 0.0f64..0.5,
        ins in 0.0f64..0.3,
        rank in prop::option::of(1usize..12),
        len in 1usize..12,
    ) {
        let reference: Vec<String> = (0..len).map(|i| format!("w{}", i % 5)).collect();
        let include = match rank {
            Some(r) if r <= n => ReferenceRank::At(r),
            _ => ReferenceRank::Never,
        };
        let cfg = ChannelConfig {
            sub_rate: sub, del_rate: del, ins_rate: ins, n, include_reference_rank: include, seed,
            ..ChannelConfig::default()
        };
        let g = generate("u", &reference, &cfg).unwrap();
        prop_assert_eq!(g.list.len(), n);
        prop_assert!(g.list.validate().is_ok());
        prop_assert!(g.list.hypotheses.windows(2).all(|w| w[0].score >= w[1].score));
        if let ReferenceRank::At(r) = include {
            prop_assert_eq!(&g.list.hypotheses[r - 1].words, &reference);
        }
        if !g.duplicates {
            let mut seen: Vec<&Vec<String>> = g.list.hypotheses.iter().map(|h| &h.words).collect();
            seen.sort();
            seen.dedup();
            prop_assert_eq!(seen.len(), n);
        }
        prop_assert_eq!(generate("u", &reference, &cfg).unwrap(), g);
    }
}
