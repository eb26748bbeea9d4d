use std::collections::BTreeMap;

use biasgen_bench::{oracle, toy_data, TOY_DICT_ENTRIES, TOY_PAIRS, TOY_SEED};
use biasgen_core::index::collect_keys2paragraph;
use biasgen_core::inventory::{compute_idf, merge_sources};
use biasgen_core::PatternSet;

#[test]
fn keys2paragraph_matches_naive_scan() {
    let data = toy_data(TOY_SEED + 1, 300, TOY_PAIRS, TOY_DICT_ENTRIES);
    let inv = merge_sources(data.sources.iter().cloned()).unwrap();
    let patterns: Vec<String> = inv.origs().map(|p| p.to_string()).collect();
    let matcher = PatternSet::new(inv.origs().cloned()).unwrap();
    let records = collect_keys2paragraph(data.paragraphs.clone(), &matcher).unwrap();

    let mut got: BTreeMap<(u64, String), usize> = BTreeMap::new();
    for r in &records {
        for o in &r.occurrences {
            *got.entry((r.id, o.key.to_string())).or_default() += 1;
        }
    }
    let mut want: BTreeMap<(u64, String), usize> = BTreeMap::new();
    for (id, text) in data.paragraphs.iter().enumerate() {
        for (_, _, key) in oracle::occurrences(text, &patterns) {
            *want.entry((id as u64, key)).or_default() += 1;
        }
    }
    assert!(!want.is_empty());
    assert_eq!(got, want);
}

#[test]
fn idf_on_100_paragraphs_matches_naive_counts() {
    let data = toy_data(TOY_SEED + 2, 100, TOY_PAIRS, TOY_DICT_ENTRIES);
    let phrases = merge_sources(data.sources.iter().cloned()).unwrap().all_phrases();
    let idf = compute_idf(data.paragraphs.clone(), &phrases).unwrap();
    let names = phrases.iter().map(|p| p.to_string()).collect();
    let (want, _) = oracle::idf(&data.paragraphs, &names);
    let got: BTreeMap<String, f64> = idf.scores.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    assert_eq!(got, want);
}

#[test]
fn in_one_of_four_paragraphs_scores_ln_4() {
    let paras: Vec<String> = ["the congo river", "a town", "bantu", "a road"].iter().map(|s| s.to_string()).collect();
    let (phrases, _) = oracle::idf(&paras, &["congo".to_string()].into_iter().collect());
    assert_eq!(phrases["congo"], 4f64.ln());
}
