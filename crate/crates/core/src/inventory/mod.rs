//! The phrase corruption inventory: merged recognizer output with counts,
//! document-frequency statistics and common-phrase filtering.

mod idf;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use idf::{compute_idf, compute_idf_batched, read_idf, write_idf};

use crate::corpus::{CorruptionPair, IdfTable, SourceId};
use crate::error::{Error, Result};
use crate::phrase::Phrase;

/// A recognized variant of a reference phrase with its count summed over
/// sources.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variant {
    pub recog: Phrase,
    pub total: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Inventory {
    /// One entry per (orig, recog, source), sorted.
    rows: BTreeMap<(Phrase, Phrase, SourceId), u64>,
    /// Variants per reference phrase, by descending total then recog.
    index: BTreeMap<Phrase, Vec<Variant>>,
}

impl Inventory {
    fn from_rows(rows: BTreeMap<(Phrase, Phrase, SourceId), u64>) -> Self {
        let mut totals: BTreeMap<&Phrase, BTreeMap<&Phrase, u64>> = BTreeMap::new();
        for ((orig, recog, _), &count) in &rows {
            *totals.entry(orig).or_default().entry(recog).or_default() += count;
        }
        let index = totals
            .into_iter()
            .map(|(orig, variants)| {
                let mut v: Vec<Variant> =
                    variants.into_iter().map(|(recog, total)| Variant { recog: recog.clone(), total }).collect();
                v.sort_by(|a, b| b.total.cmp(&a.total).then_with(|| a.recog.cmp(&b.recog)));
                (orig.clone(), v)
            })
            .collect();
        Inventory { rows, index }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Number of (orig, recog, source) rows.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Rows in (orig, recog, source) order.
    pub fn pairs(&self) -> impl Iterator<Item = CorruptionPair> + '_ {
        self.rows.iter().map(|((o, r, s), &count)| CorruptionPair {
            orig: o.clone(),
            recog: r.clone(),
            count,
            source: s.clone(),
        })
    }

    pub fn origs(&self) -> impl Iterator<Item = &Phrase> + '_ {
        self.index.keys()
    }

    pub fn orig_count(&self) -> usize {
        self.index.len()
    }

    pub fn variants(&self, orig: &str) -> Option<&[Variant]> {
        self.index.get(orig).map(Vec::as_slice)
    }

    pub fn contains(&self, orig: &str) -> bool {
        self.index.contains_key(orig)
    }

    /// `(orig, variant)` for every distinct reference/recognized pair.
    pub fn variant_pairs(&self) -> impl Iterator<Item = (&Phrase, &Variant)> + '_ {
        self.index.iter().flat_map(|(o, vs)| vs.iter().map(move |v| (o, v)))
    }

    /// Every reference and recognized phrase.
    pub fn all_phrases(&self) -> BTreeSet<Phrase> {
        self.variant_pairs().flat_map(|(o, v)| [o.clone(), v.recog.clone()]).collect()
    }

    pub fn retain_origs(&self, mut keep: impl FnMut(&Phrase) -> bool) -> Inventory {
        let rows = self.rows.iter().filter(|((o, _, _), _)| keep(o)).map(|(k, &v)| (k.clone(), v)).collect();
        Inventory::from_rows(rows)
    }
}

/// Merges corruption pairs from several recognizers.
///
/// Each stream must hold at most one row per (orig, recog, source). Rows
/// repeated across streams have their counts added.
pub fn merge_sources<S, I>(streams: S) -> Result<Inventory>
where
    S: IntoIterator<Item = I>,
    I: IntoIterator<Item = CorruptionPair>,
{
    let mut rows: BTreeMap<(Phrase, Phrase, SourceId), u64> = BTreeMap::new();
    for (n, stream) in streams.into_iter().enumerate() {
        let mut seen = BTreeSet::new();
        for pair in stream {
            if pair.count == 0 {
                return Err(Error::InvalidRecord(format!(
                    "stream {n}: zero count for {} -> {}",
                    pair.orig, pair.recog
                )));
            }
            let key = (pair.orig, pair.recog, pair.source);
            if !seen.insert(key.clone()) {
                return Err(Error::InvalidRecord(format!(
                    "stream {n}: duplicate row {} -> {} ({})",
                    key.0, key.1, key.2
                )));
            }
            *rows.entry(key).or_default() += pair.count;
        }
    }
    Ok(Inventory::from_rows(rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterThresholds {
    pub phrase_min_idf: f64,
    pub edge_word_min_idf: f64,
    /// Multiplies both thresholds for phrases whose corpus occurrences are
    /// mostly uppercase-initial.
    pub uppercase_relax_factor: f64,
}

impl Default for FilterThresholds {
    fn default() -> Self {
        FilterThresholds { phrase_min_idf: 4.0, edge_word_min_idf: 3.0, uppercase_relax_factor: 0.5 }
    }
}

impl FilterThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.uppercase_relax_factor > 0.0 && self.uppercase_relax_factor <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "uppercase_relax_factor {} outside (0,1]",
                self.uppercase_relax_factor
            )));
        }
        if self.phrase_min_idf.is_nan() || self.edge_word_min_idf.is_nan() {
            return Err(Error::InvalidParams("NaN threshold".into()));
        }
        Ok(())
    }
}

/// Whether `orig` survives the common-phrase filter.
pub fn keeps_key(orig: &Phrase, idf: &IdfTable, t: &FilterThresholds) -> bool {
    let relax = match idf.uppercase_share.get(orig) {
        Some(&share) if share > 0.5 => t.uppercase_relax_factor,
        _ => 1.0,
    };
    idf.phrase_idf(orig.as_str()) >= t.phrase_min_idf * relax
        && idf.word_idf(orig.first_word()) >= t.edge_word_min_idf * relax
        && idf.word_idf(orig.last_word()) >= t.edge_word_min_idf * relax
}

/// Drops reference phrases that are too common, or that begin or end with
/// a too-common word.
pub fn filter_keys(inv: &Inventory, idf: &IdfTable, thresholds: &FilterThresholds) -> Inventory {
    inv.retain_origs(|o| keeps_key(o, idf, thresholds))
}
