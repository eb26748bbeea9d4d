use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::CharAlignment;
use crate::corpus::{CorruptionPair, SourceId};
use crate::phrase::{Phrase, Span};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpansionParams {
    /// Longest reference word n-gram extracted.
    pub max_order: usize,
    /// A segment is dropped when more than this fraction of its recognized
    /// span is shared with a disjoint sibling segment's span.
    pub overlap_drop: f64,
}

impl Default for ExpansionParams {
    fn default() -> Self {
        ExpansionParams { max_order: 3, overlap_drop: 0.5 }
    }
}

struct Segment {
    words: (usize, usize),
    orig: Span,
    recog: Option<Span>,
}

/// Word n-grams of the reference paired with the recognized text aligned to
/// them.
///
/// Every n-gram up to `max_order` words is mapped to the smallest span of
/// the recognized phrase covering all characters linked into it, trimmed of
/// edge spaces. Segments with no linked characters, or overlapping a sibling
/// of the same order (one sharing no reference word) by more than
/// `overlap_drop` of their length, are dropped. Output pairs keep the
/// parent's count and are marked as subphrase expansions.
pub fn extract_subphrases(
    pair: &CorruptionPair,
    alignment: &CharAlignment,
    params: &ExpansionParams,
) -> Vec<CorruptionPair> {
    let orig: Vec<char> = pair.orig.as_str().chars().collect();
    let recog: Vec<char> = pair.recog.as_str().chars().collect();
    debug_assert_eq!(alignment.links.len(), recog.len());

    let mut word_spans = Vec::new();
    let mut start = 0;
    for (i, &c) in orig.iter().enumerate() {
        if c == ' ' {
            word_spans.push(Span::new(start, i));
            start = i + 1;
        }
    }
    word_spans.push(Span::new(start, orig.len()));

    let max_order = params.max_order.min(word_spans.len());
    let mut out = Vec::new();
    let mut emitted = BTreeSet::new();
    for n in 1..=max_order {
        let segments: Vec<Segment> = (0..=word_spans.len() - n)
            .map(|w| {
                let span = Span::new(word_spans[w].start, word_spans[w + n - 1].end);
                Segment { words: (w, w + n), orig: span, recog: recog_span(alignment, span, &recog) }
            })
            .collect();
        for seg in &segments {
            let Some(rspan) = seg.recog else { continue };
            let conflicted = segments.iter().any(|sib| {
                let disjoint = sib.words.1 <= seg.words.0 || seg.words.1 <= sib.words.0;
                match (disjoint, sib.recog) {
                    (true, Some(other)) => {
                        rspan.intersection_len(&other) as f64 > params.overlap_drop * rspan.len() as f64
                    }
                    _ => false,
                }
            });
            if conflicted {
                continue;
            }
            let o: String = orig[seg.orig.start..seg.orig.end].iter().collect();
            let r: String = recog[rspan.start..rspan.end].iter().collect();
            let (Ok(o), Ok(r)) = (Phrase::new(o), Phrase::new(r)) else {
                continue;
            };
            if emitted.insert((o.clone(), r.clone())) {
                out.push(CorruptionPair {
                    orig: o,
                    recog: r,
                    count: pair.count,
                    source: SourceId::subphrase_expansion(),
                });
            }
        }
    }
    out
}

fn recog_span(alignment: &CharAlignment, orig: Span, recog: &[char]) -> Option<Span> {
    let mut lo = usize::MAX;
    let mut hi = 0;
    for (i, j) in alignment.pairs() {
        if orig.start <= i && i < orig.end {
            lo = lo.min(j);
            hi = hi.max(j + 1);
        }
    }
    if lo >= hi {
        return None;
    }
    while lo < hi && recog[lo] == ' ' {
        lo += 1;
    }
    while hi > lo && recog[hi - 1] == ' ' {
        hi -= 1;
    }
    (lo < hi).then(|| Span::new(lo, hi))
}
