use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::corpus::{FalsePositivePair, IdfTable};
use crate::error::Result;
use crate::index::{PatternSet, StepCounter};
use crate::inventory::Inventory;
use crate::phrase::{lower_char, Phrase};

/// Whether every word of `ngram` is common, i.e. has a word idf below
/// `max_word_idf`. Words missing from the table are not common.
pub fn is_common_ngram(ngram: &Phrase, idf: &IdfTable, max_word_idf: f64) -> bool {
    ngram.words().all(|w| idf.word_idf(w) < max_word_idf)
}

pub fn mine_false_positives<I>(
    inv: &Inventory,
    corpus: I,
    idf: &IdfTable,
    max_word_idf: f64,
) -> Result<Vec<FalsePositivePair>>
where
    I: IntoIterator<Item = String>,
{
    mine_false_positives_batched(inv, corpus.into_iter().map(Ok), idf, max_word_idf, 8192)
}

/// Counts corpus occurrences of recognized variants made of common words.
///
/// Every word-boundary hit of `recog` adds one to the support of each
/// `(recog, orig)` pair with `orig != recog`. Pairs without hits are not
/// emitted. Output is ordered by n-gram, then phrase.
pub fn mine_false_positives_batched<I>(
    inv: &Inventory,
    corpus: I,
    idf: &IdfTable,
    max_word_idf: f64,
    batch_size: usize,
) -> Result<Vec<FalsePositivePair>>
where
    I: IntoIterator<Item = Result<String>>,
{
    let mut by_ngram: BTreeMap<&Phrase, Vec<&Phrase>> = BTreeMap::new();
    for (orig, v) in inv.variant_pairs() {
        if orig != &v.recog && is_common_ngram(&v.recog, idf, max_word_idf) {
            by_ngram.entry(&v.recog).or_default().push(orig);
        }
    }
    if by_ngram.is_empty() {
        // Still drain the corpus so read errors surface.
        for p in corpus {
            p?;
        }
        return Ok(Vec::new());
    }
    let matcher = PatternSet::new(by_ngram.keys().map(|p| (*p).clone()))?;

    let mut support = vec![0u64; matcher.len()];
    let mut batch = Vec::with_capacity(batch_size.max(1));
    let mut flush = |batch: &mut Vec<String>| {
        let counts = batch
            .par_chunks(256)
            .map(|chunk| {
                let mut c = vec![0u64; matcher.len()];
                let mut steps = StepCounter::default();
                for text in chunk {
                    let lower: Vec<char> = text.chars().map(lower_char).collect();
                    for h in matcher.hits_in(&lower, &mut steps) {
                        c[h.pattern] += 1;
                    }
                }
                c
            })
            .reduce(
                || vec![0u64; matcher.len()],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        support.iter_mut().zip(counts).for_each(|(x, y)| *x += y);
        batch.clear();
    };
    for p in corpus {
        batch.push(p?);
        if batch.len() >= batch_size.max(1) {
            flush(&mut batch);
        }
    }
    flush(&mut batch);

    // Patterns are sorted, as are the keys of `by_ngram`.
    let mut out = Vec::new();
    for ((ngram, origs), &n) in by_ngram.iter().zip(&support) {
        if n == 0 {
            continue;
        }
        let mut origs = origs.clone();
        origs.sort();
        for orig in origs {
            out.push(FalsePositivePair { ngram: (*ngram).clone(), phrase: orig.clone(), support: n });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorruptionPair, SourceId};
    use crate::inventory::merge_sources;

    fn p(s: &str) -> Phrase {
        Phrase::new(s).unwrap()
    }

    fn inv(rows: &[(&str, &str)]) -> Inventory {
        merge_sources([rows
            .iter()
            .map(|(o, r)| CorruptionPair::new(p(o), p(r), 2, SourceId::new("asr_a").unwrap()).unwrap())
            .collect::<Vec<_>>()])
        .unwrap()
    }

    fn idf(words: &[(&str, f64)]) -> IdfTable {
        IdfTable {
            doc_count: 10,
            word_scores: words.iter().map(|(w, s)| (w.to_string(), *s)).collect(),
            ..IdfTable::default()
        }
    }

    #[test]
    fn knutsen_nuts_and() {
        let inv = inv(&[("knutsen", "nuts and"), ("knutsen", "knutsen"), ("zaire", "the ire")]);
        let table = idf(&[("nuts", 2.0), ("and", 0.1), ("knutsen", 6.0), ("the", 0.0)]);
        let corpus = vec!["Chopped nuts and soaked in honey.".to_string(), "Walnuts and more".to_string()];
        let got = mine_false_positives(&inv, corpus, &table, 3.0).unwrap();
        assert_eq!(got, vec![FalsePositivePair { ngram: p("nuts and"), phrase: p("knutsen"), support: 1 }]);
    }

    #[test]
    fn uncommon_words_are_not_mined() {
        let inv = inv(&[("knutsen", "nuts and")]);
        let table = idf(&[("nuts", 5.0), ("and", 0.1)]);
        let got = mine_false_positives(&inv, vec!["nuts and".to_string()], &table, 3.0).unwrap();
        assert!(got.is_empty());
    }
}
