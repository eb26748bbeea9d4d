use std::collections::HashSet;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::{CorruptedSnippet, SamplingStrategy};
use crate::corpus::{Candidate, CandidateLabel, Substitution, TrainingExample};
use crate::error::{Error, Result};
use crate::negative::NegativePools;
use crate::phrase::Phrase;

/// Draws `n` of `avail` without replacement, in draw order.
fn pick<R: Rng + ?Sized>(avail: &[Phrase], n: usize, rng: &mut R) -> Vec<Phrase> {
    let n = n.min(avail.len());
    index::sample(rng, avail.len(), n).into_iter().map(|i| avail[i].clone()).collect()
}

/// Builds a shuffled list of exactly `list_size` distinct candidates.
///
/// With probability `p_correct` the substituted reference phrases are
/// listed as positives. False positives whose n-grams occur in the
/// corrupted snippet are added (a uniform count in `fp_range`, fewer if not
/// enough exist), related phrases of the positives (uniform in
/// `1..=max_related`) only when positives are listed, and the rest is drawn
/// uniformly from `global_pool`. No negative ever equals a substituted
/// reference phrase.
pub fn assemble_biasing_list<R: Rng + ?Sized>(
    substitutions: &[Substitution],
    corrupted_snippet: &str,
    pools: &NegativePools,
    global_pool: &[Phrase],
    strategy: &SamplingStrategy,
    rng: &mut R,
) -> Result<Vec<Candidate>> {
    let k = strategy.list_size;
    let mut positives: Vec<&Phrase> = Vec::new();
    for s in substitutions {
        if !positives.contains(&&s.orig) {
            positives.push(&s.orig);
        }
    }
    let mut taken: HashSet<Phrase> = positives.iter().map(|p| (*p).clone()).collect();
    let include = rng.gen_bool(strategy.p_correct) && !positives.is_empty();
    let mut list: Vec<Candidate> = Vec::with_capacity(k);
    if include {
        list.extend(positives.iter().map(|p| Candidate { phrase: (*p).clone(), label: CandidateLabel::Positive }));
    }
    if list.len() > k {
        return Err(Error::InvalidParams(format!("{} positives exceed list_size {k}", list.len())));
    }

    let [fp_lo, fp_hi] = strategy.fp_range;
    let n_fp = rng.gen_range(fp_lo..=fp_hi);
    let fp_avail: Vec<Phrase> =
        pools.false_positives(corrupted_snippet).into_iter().map(|(p, _)| p).filter(|p| !taken.contains(p)).collect();
    for p in pick(&fp_avail, n_fp, rng) {
        taken.insert(p.clone());
        list.push(Candidate { phrase: p, label: CandidateLabel::FalsePositive });
    }

    if include && strategy.max_related > 0 {
        let n_rel = rng.gen_range(1..=strategy.max_related);
        let mut rel_avail: Vec<Phrase> = Vec::new();
        for pos in &positives {
            for (r, _) in pools.related(pos.as_str()) {
                if !taken.contains(r) && !rel_avail.contains(r) {
                    rel_avail.push(r.clone());
                }
            }
        }
        for p in pick(&rel_avail, n_rel, rng) {
            taken.insert(p.clone());
            list.push(Candidate { phrase: p, label: CandidateLabel::Related });
        }
    }

    let need = k - list.len();
    let available = global_pool.len() - global_pool.iter().filter(|p| taken.contains(*p)).count();
    if available < need {
        return Err(Error::PoolTooSmall { available, needed: need });
    }
    let mut misses = 0;
    while list.len() < k {
        let p = &global_pool[rng.gen_range(0..global_pool.len())];
        if taken.contains(p) {
            misses += 1;
            if misses > 32 * k {
                // Dense exclusions: finish with a draw over what is left.
                let rest: Vec<Phrase> = global_pool.iter().filter(|p| !taken.contains(*p)).cloned().collect();
                let more = pick(&rest, k - list.len(), rng);
                list.extend(more.into_iter().map(|phrase| Candidate { phrase, label: CandidateLabel::Random }));
                break;
            }
            continue;
        }
        taken.insert(p.clone());
        list.push(Candidate { phrase: p.clone(), label: CandidateLabel::Random });
    }
    list.shuffle(rng);
    Ok(list)
}

/// Tags each substituted span of the corrupted snippet with the 1-based
/// index of its positive candidate; everything else is 0, as is every
/// character when the list holds no positive.
pub fn emit_example(snippet: CorruptedSnippet, candidates: Vec<Candidate>) -> Result<TrainingExample> {
    let mut char_tags = vec![0u8; snippet.corrupted.chars().count()];
    let any_positive = candidates.iter().any(|c| c.label == CandidateLabel::Positive);
    if any_positive {
        for s in &snippet.substitutions {
            let i =
                candidates.iter().position(|c| c.label == CandidateLabel::Positive && c.phrase == s.orig).ok_or_else(
                    || Error::InvalidRecord(format!("substituted {:?} has no positive candidate", s.orig.as_str())),
                )?;
            char_tags[s.corrupted_span.start..s.corrupted_span.end].fill((i + 1) as u8);
        }
    }
    let ex = TrainingExample {
        original_snippet: snippet.original,
        corrupted_snippet: snippet.corrupted,
        substitutions: snippet.substitutions,
        candidates,
        char_tags,
    };
    ex.validate()?;
    Ok(ex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::FalsePositivePair;
    use crate::phrase::Span;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> Phrase {
        Phrase::new(s).unwrap()
    }

    fn global(n: usize) -> Vec<Phrase> {
        (0..n).map(|i| p(&format!("phrase{i:03}"))).collect()
    }

    fn knutsen_snippet() -> CorruptedSnippet {
        CorruptedSnippet {
            original: "knutsen chopped nuts and honey".into(),
            corrupted: "nuts and chopped nuts and honey".into(),
            substitutions: vec![Substitution {
                orig_span: Span::new(0, 7),
                corrupted_span: Span::new(0, 8),
                orig: p("knutsen"),
                corrupted: p("nuts and"),
            }],
        }
    }

    #[test]
    fn positive_is_not_reused_as_false_positive() {
        let pools = NegativePools::new(
            [],
            [
                FalsePositivePair { ngram: p("nuts and"), phrase: p("knutsen"), support: 5 },
                FalsePositivePair { ngram: p("honey"), phrase: p("hunny"), support: 2 },
            ],
        )
        .unwrap();
        let strategy = SamplingStrategy { p_correct: 1.0, ..SamplingStrategy::default() };
        let s = knutsen_snippet();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = assemble_biasing_list(&s.substitutions, &s.corrupted, &pools, &global(30), &strategy, &mut rng)
                .unwrap();
            assert_eq!(c.len(), 10);
            let label = |l| c.iter().filter(|x| x.label == l).count();
            assert_eq!(label(CandidateLabel::Positive), 1);
            assert_eq!(label(CandidateLabel::FalsePositive), 1);
            assert!(c.iter().any(|x| x.phrase.as_str() == "hunny"));
            let ex = emit_example(s.clone(), c).unwrap();
            assert!(ex.has_correct_candidate());
        }
    }

    #[test]
    fn positives_plus_random_fill() {
        let pools = NegativePools::default();
        let strategy = SamplingStrategy { p_correct: 1.0, ..SamplingStrategy::default() };
        let s = knutsen_snippet();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c =
            assemble_biasing_list(&s.substitutions, &s.corrupted, &pools, &global(12), &strategy, &mut rng).unwrap();
        assert_eq!(c.iter().filter(|x| x.label == CandidateLabel::Random).count(), 9);
        let ex = emit_example(s, c).unwrap();
        let pos = ex.candidates.iter().position(|x| x.phrase.as_str() == "knutsen").unwrap() as u8 + 1;
        assert_eq!(&ex.char_tags[..8], &[pos; 8]);
        assert!(ex.char_tags[8..].iter().all(|&t| t == 0));
    }

    #[test]
    fn no_correct_candidate_means_zero_tags() {
        let strategy = SamplingStrategy { p_correct: 0.0, ..SamplingStrategy::default() };
        let s = knutsen_snippet();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut pool = global(12);
        pool.push(p("knutsen"));
        let c = assemble_biasing_list(
            &s.substitutions,
            &s.corrupted,
            &NegativePools::default(),
            &pool,
            &strategy,
            &mut rng,
        )
        .unwrap();
        assert!(c.iter().all(|x| x.phrase.as_str() != "knutsen"));
        let ex = emit_example(s, c).unwrap();
        assert!(ex.char_tags.iter().all(|&t| t == 0));
        assert_ne!(ex.original_snippet, ex.corrupted_snippet);
    }

    #[test]
    fn small_pool() {
        let s = knutsen_snippet();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let e = assemble_biasing_list(
            &s.substitutions,
            &s.corrupted,
            &NegativePools::default(),
            &global(5),
            &SamplingStrategy::default(),
            &mut rng,
        );
        assert!(matches!(e, Err(Error::PoolTooSmall { .. })));
    }

    #[test]
    fn missing_positive_is_an_error() {
        let s = knutsen_snippet();
        let c = vec![
            Candidate { phrase: p("other"), label: CandidateLabel::Positive },
            Candidate { phrase: p("more"), label: CandidateLabel::Random },
        ];
        assert!(emit_example(s, c).is_err());
    }
}
