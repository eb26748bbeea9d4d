use std::collections::{BTreeMap, HashMap};

use crate::corpus::{FalsePositivePair, RelatedPair};
use crate::error::Result;
use crate::index::PatternSet;
use crate::phrase::Phrase;

/// Read-only lookup over the related and false-positive pools.
#[derive(Debug, Default)]
pub struct NegativePools {
    /// Related phrases by key, by descending similarity then text.
    related: HashMap<Phrase, Vec<(Phrase, f64)>>,
    fp_matcher: Option<PatternSet>,
    /// Indexed by `fp_matcher` pattern id.
    fp_phrases: Vec<Vec<(Phrase, u64)>>,
}

impl NegativePools {
    pub fn new(
        related: impl IntoIterator<Item = RelatedPair>,
        false_positives: impl IntoIterator<Item = FalsePositivePair>,
    ) -> Result<Self> {
        let mut rel: BTreeMap<Phrase, BTreeMap<Phrase, f64>> = BTreeMap::new();
        for r in related {
            let e = rel.entry(r.key).or_default().entry(r.related).or_insert(r.similarity);
            *e = e.max(r.similarity);
        }
        let related = rel
            .into_iter()
            .map(|(k, v)| {
                let mut v: Vec<(Phrase, f64)> = v.into_iter().collect();
                v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
                (k, v)
            })
            .collect();

        let mut fp: BTreeMap<Phrase, BTreeMap<Phrase, u64>> = BTreeMap::new();
        for f in false_positives {
            let e = fp.entry(f.ngram).or_default().entry(f.phrase).or_default();
            *e = (*e).max(f.support);
        }
        let fp_matcher = if fp.is_empty() { None } else { Some(PatternSet::new(fp.keys().cloned())?) };
        let fp_phrases = fp.into_values().map(|m| m.into_iter().collect()).collect();
        Ok(NegativePools { related, fp_matcher, fp_phrases })
    }

    /// Related phrases of `key`, most similar first.
    pub fn related(&self, key: &str) -> &[(Phrase, f64)] {
        self.related.get(key).map_or(&[], Vec::as_slice)
    }

    pub fn related_key_count(&self) -> usize {
        self.related.len()
    }

    /// False-positive phrases whose n-gram occurs in `snippet`, by descending
    /// support then text. A phrase reached through several n-grams appears
    /// once, with its largest support.
    pub fn false_positives(&self, snippet: &str) -> Vec<(Phrase, u64)> {
        let Some(m) = &self.fp_matcher else {
            return Vec::new();
        };
        let mut best: BTreeMap<&Phrase, u64> = BTreeMap::new();
        for h in m.hits(snippet) {
            for (p, s) in &self.fp_phrases[h.pattern] {
                let e = best.entry(p).or_default();
                *e = (*e).max(*s);
            }
        }
        let mut out: Vec<(Phrase, u64)> = best.into_iter().map(|(p, s)| (p.clone(), s)).collect();
        out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out
    }
}
