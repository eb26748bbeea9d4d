//! Hard-negative pools for biasing lists: related phrases (similar to a
//! positive phrase but distinguishable from it) and false positives
//! (phrases whose recognized variants look like ordinary text).

mod false_positive;
mod pools;

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use false_positive::{is_common_ngram, mine_false_positives, mine_false_positives_batched};
pub use pools::NegativePools;

use crate::corpus::RelatedPair;
use crate::error::{Error, Result};
use crate::phrase::Phrase;

/// Consonant skeleton of a phrase, used to spot spelling variants.
///
/// Per word: `ph`→`f`, `ck`→`k`, `c`→`k`, `z`→`s`; vowels (including `y`)
/// and `h` are dropped unless word-initial; repeated letters collapse.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhoneticKey(String);

impl PhoneticKey {
    pub fn of(phrase: &str) -> Self {
        let mut out = String::with_capacity(phrase.len());
        for (n, word) in phrase.split(' ').enumerate() {
            if n > 0 {
                out.push(' ');
            }
            let chars: Vec<char> = word.chars().flat_map(char::to_lowercase).collect();
            let mut mapped = Vec::with_capacity(chars.len());
            let mut i = 0;
            while i < chars.len() {
                let pair = (chars[i], chars.get(i + 1).copied());
                let (c, step) = match pair {
                    ('p', Some('h')) => ('f', 2),
                    ('c', Some('k')) => ('k', 2),
                    ('c', _) => ('k', 1),
                    ('z', _) => ('s', 1),
                    (c, _) => (c, 1),
                };
                mapped.push(c);
                i += step;
            }
            let mut last = None;
            for (i, c) in mapped.into_iter().enumerate() {
                if i > 0 && matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y' | 'h') {
                    continue;
                }
                if last != Some(c) {
                    out.push(c);
                }
                last = Some(c);
            }
        }
        PhoneticKey(out)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// `1 - levenshtein(a, b) / max(len a, len b)` over characters.
pub fn similarity(a: &str, b: &str) -> f64 {
    let la = a.chars().count();
    let lb = b.chars().count();
    let longest = la.max(lb);
    if longest == 0 {
        return 1.0;
    }
    1.0 - strsim::levenshtein(a, b) as f64 / longest as f64
}

/// Two phrases that sound alike are spelling variants, not useful negatives.
pub fn is_spelling_variant(a: &str, b: &str) -> bool {
    PhoneticKey::of(a) == PhoneticKey::of(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelatedParams {
    pub min_sim: f64,
    pub max_sim: f64,
}

impl Default for RelatedParams {
    fn default() -> Self {
        RelatedParams { min_sim: 0.5, max_sim: 0.9 }
    }
}

impl RelatedParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.min_sim && self.min_sim < self.max_sim && self.max_sim < 1.0) {
            return Err(Error::InvalidParams(format!(
                "need 0 < min_sim < max_sim < 1, got ({}, {})",
                self.min_sim, self.max_sim
            )));
        }
        Ok(())
    }
}

/// Blocking keys: every word and every character 4-gram.
fn blocks(phrase: &str) -> BTreeSet<String> {
    let mut out: BTreeSet<String> = phrase.split(' ').map(|w| format!("w {w}")).collect();
    let chars: Vec<char> = phrase.chars().collect();
    for g in chars.windows(4) {
        out.insert(format!("g {}", g.iter().collect::<String>()));
    }
    out
}

/// Related-phrase pairs within `pool`.
///
/// Candidates must share a word or a character 4-gram with the key. A pair
/// is emitted, in both orientations, when its similarity lies in
/// `[min_sim, max_sim]` and the two are not spelling variants. Output is
/// ordered by key, then descending similarity, then related phrase.
pub fn mine_related(pool: &BTreeSet<Phrase>, params: &RelatedParams) -> Result<Vec<RelatedPair>> {
    params.validate()?;
    let phrases: Vec<&Phrase> = pool.iter().collect();
    let lens: Vec<usize> = phrases.iter().map(|p| p.char_len()).collect();
    let keys: Vec<PhoneticKey> = phrases.iter().map(|p| PhoneticKey::of(p.as_str())).collect();
    let mut index: HashMap<String, Vec<u32>> = HashMap::new();
    let phrase_blocks: Vec<BTreeSet<String>> = phrases.iter().map(|p| blocks(p.as_str())).collect();
    for (i, bs) in phrase_blocks.iter().enumerate() {
        for b in bs {
            index.entry(b.clone()).or_default().push(i as u32);
        }
    }

    let per_key: Vec<Vec<RelatedPair>> = (0..phrases.len())
        .into_par_iter()
        .map(|i| {
            let mut cands: Vec<u32> =
                phrase_blocks[i].iter().flat_map(|b| index[b].iter().copied()).filter(|&j| j as usize != i).collect();
            cands.sort_unstable();
            cands.dedup();
            let mut out: Vec<RelatedPair> = cands
                .into_iter()
                .filter_map(|j| {
                    let j = j as usize;
                    // Edit distance is at least the length difference.
                    let (a, b) = (lens[i], lens[j]);
                    if (a.abs_diff(b) as f64) > (1.0 - params.min_sim) * a.max(b) as f64 {
                        return None;
                    }
                    let sim = similarity(phrases[i].as_str(), phrases[j].as_str());
                    let keep = sim >= params.min_sim && sim <= params.max_sim && keys[i] != keys[j];
                    keep.then(|| RelatedPair { key: phrases[i].clone(), related: phrases[j].clone(), similarity: sim })
                })
                .collect();
            out.sort_by(|x, y| y.similarity.total_cmp(&x.similarity).then_with(|| x.related.cmp(&y.related)));
            out
        })
        .collect();
    Ok(per_key.into_iter().flatten().collect())
}
