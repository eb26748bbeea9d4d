use biasgen_core::metrics::{align, biasing_precision_recall, changed_sentence_rate, word_error_rate};
use biasgen_core::{PatternSet, Phrase};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vocab() -> PatternSet {
    PatternSet::new(
        ["mbesa", "bantu", "congo", "republic of the congo", "eufaula"].iter().map(|p| Phrase::new(*p).unwrap()),
    )
    .unwrap()
}

// (reference, hypothesis); per-line counts are listed as
// ref occurrences / ref hits / hyp occurrences / hyp hits.
const FIXTURE: &[(&str, &str)] = &[
    ("mbesa is a bantu language", "mbesa is a bantu language"), // 2/2/2/2
    ("the republic of the congo", "the republic of the condo"), // 2/0/0/0 (nested occurrence counts)
    ("he lives in eufaula", "he lives in you fall a"),          // 1/0/0/0
    ("the band played", "the bantu played"),                    // 0/0/1/0 false alarm
    ("congo and bantu", "congo and bantu"),                     // 2/2/2/2
    ("a bantu and a congo", "a bantu a congo"),                 // 2/2/2/2 around a deletion
    ("nothing to see here", "nothing to see here"),             // 0/0/0/0
    ("mbesa mbesa", "mbesa"),                                   // 2/1/1/1
    ("the congo river", "the kongo river"),                     // 1/0/0/0
    ("eufaula alabama", "eufaula alabama congo"),               // 1/1/2/1 inserted phrase
];

#[test]
fn ten_sentence_fixture_matches_hand_counts() {
    let refs: Vec<&str> = FIXTURE.iter().map(|f| f.0).collect();
    let hyps: Vec<&str> = FIXTURE.iter().map(|f| f.1).collect();
    let pr = biasing_precision_recall(&refs, &hyps, &vocab(), None).unwrap();
    assert_eq!(
        (pr.reference_occurrences, pr.reference_hits, pr.hypothesis_occurrences, pr.hypothesis_hits),
        (13, 8, 10, 8)
    );
    assert_eq!(pr.recall(), 8.0 / 13.0);
    assert_eq!(pr.precision(), 0.8);

    // The baseline misses both phrases of the first line and otherwise
    // equals the hypothesis, so only the first line's fixes earn recall.
    let mut base = hyps.clone();
    base[0] = "embassa is a band to language";
    let pr = biasing_precision_recall(&refs, &hyps, &vocab(), Some(&base)).unwrap();
    assert_eq!((pr.reference_occurrences, pr.reference_hits), (7, 2));
    assert_eq!(pr.precision(), 0.8);
    assert_eq!(changed_sentence_rate(&base, &hyps).unwrap(), 10.0);
}

#[test]
fn identity_corrector_recall_is_a_lower_bound() {
    // A corrector that fixes only errors can only add hits over leaving the
    // corrupted text unchanged.
    let refs: Vec<&str> = FIXTURE.iter().map(|f| f.0).collect();
    let corrupted: Vec<&str> = FIXTURE.iter().map(|f| f.1).collect();
    let mut fixed = corrupted.clone();
    fixed[1] = refs[1];
    fixed[8] = refs[8];
    let base = biasing_precision_recall(&refs, &corrupted, &vocab(), None).unwrap();
    let better = biasing_precision_recall(&refs, &fixed, &vocab(), None).unwrap();
    assert!(better.recall() >= base.recall());
    assert_eq!(better.reference_hits, base.reference_hits + 3);
}

#[test]
fn changed_rate_equals_direct_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(10_000);
    let words = ["a", "b", "congo", "the"];
    let base: Vec<String> = (0..10_000)
        .map(|_| (0..rng.gen_range(1..8)).map(|_| words[rng.gen_range(0..4)]).collect::<Vec<_>>().join(" "))
        .collect();
    let mut changed = 0;
    let corrected: Vec<String> = base
        .iter()
        .map(|s| {
            if rng.gen_bool(0.3) {
                let t = format!("{s} {}", words[rng.gen_range(0..4)]);
                changed += 1;
                t
            } else {
                s.clone()
            }
        })
        .collect();
    assert_eq!(changed_sentence_rate(&base, &corrected).unwrap(), 100.0 * changed as f64 / 10_000.0);
}

fn words() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "congo"]).prop_map(String::from), 0..10)
}

proptest! {
    #[test]
    fn edit_distance_properties(a in words(), b in words(), c in words()) {
        let d = |x: &[String], y: &[String]| align(x, y).0.edits();
        prop_assert_eq!(d(&a, &a), 0);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        if !a.is_empty() {
            prop_assert_eq!(word_error_rate(&a.join(" "), &a.join(" ")).unwrap().rate(), 0.0);
        }
    }

    #[test]
    fn precision_and_recall_are_fractions(r in words(), h in words()) {
        let pr = biasing_precision_recall(&[r.join(" ")], &[h.join(" ")], &vocab(), None).unwrap();
        prop_assert!((0.0..=1.0).contains(&pr.recall()) && (0.0..=1.0).contains(&pr.precision()));
        prop_assert_eq!(pr.recall_undefined(), pr.reference_occurrences == 0);
    }
}
