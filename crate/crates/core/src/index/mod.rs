//! Phrase occurrence search over paragraph text.
//!
//! Matching is done on the per-character lowercase form of the text and a
//! match counts only when both ends sit on a word boundary.

pub mod automaton;

use std::collections::BTreeSet;

use rayon::prelude::*;

pub use automaton::{Automaton, StepCounter};

use crate::corpus::{sort_occurrences, Occurrence, ParagraphRecord};
use crate::error::{Error, Result};
use crate::phrase::{is_boundary_aligned, lower_char, sanitize_field, Phrase, Span};

/// A deduplicated pattern set compiled into a multi-pattern matcher.
#[derive(Debug, Clone)]
pub struct PatternSet {
    patterns: Vec<Phrase>,
    automaton: Automaton,
}

/// A boundary-aligned match of pattern `pattern` at `span`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Hit {
    pub pattern: usize,
    pub span: Span,
}

impl PatternSet {
    pub fn new(patterns: impl IntoIterator<Item = Phrase>) -> Result<Self> {
        let patterns: Vec<Phrase> = patterns.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if patterns.is_empty() {
            return Err(Error::EmptyPatternSet);
        }
        let chars: Vec<Vec<char>> = patterns.iter().map(|p| p.as_str().chars().collect()).collect();
        let automaton = Automaton::new(chars.iter().map(|c| c.as_slice()));
        Ok(PatternSet { patterns, automaton })
    }

    /// Patterns in sorted order; [`Hit::pattern`] indexes this slice.
    pub fn patterns(&self) -> &[Phrase] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn automaton(&self) -> &Automaton {
        &self.automaton
    }

    /// All boundary-aligned hits in already-lowercased text, sorted by start
    /// then by descending length.
    pub fn hits_in(&self, lower: &[char], counter: &mut StepCounter) -> Vec<Hit> {
        let mut hits = Vec::new();
        self.automaton.for_each_match(lower, counter, |id, end| {
            let start = end - self.automaton.pattern_len(id);
            if is_boundary_aligned(lower, start, end) {
                hits.push(Hit { pattern: id as usize, span: Span::new(start, end) });
            }
        });
        hits.sort_by(|a, b| a.span.start.cmp(&b.span.start).then(b.span.len().cmp(&a.span.len())));
        hits
    }

    pub fn hits(&self, text: &str) -> Vec<Hit> {
        let lower: Vec<char> = text.chars().map(lower_char).collect();
        self.hits_in(&lower, &mut StepCounter::default())
    }

    /// Every occurrence of every pattern in `text`, with the case of the
    /// original first character.
    pub fn scan_paragraph(&self, text: &str) -> Vec<Occurrence> {
        self.scan_paragraph_counted(text, &mut StepCounter::default())
    }

    pub fn scan_paragraph_counted(&self, text: &str, counter: &mut StepCounter) -> Vec<Occurrence> {
        let chars: Vec<char> = text.chars().collect();
        let lower: Vec<char> = chars.iter().copied().map(lower_char).collect();
        let mut occ: Vec<Occurrence> = self
            .hits_in(&lower, counter)
            .into_iter()
            .map(|h| Occurrence {
                key: self.patterns[h.pattern].clone(),
                span: h.span,
                uppercase_start: chars[h.span.start].is_uppercase(),
            })
            .collect();
        sort_occurrences(&mut occ);
        occ
    }
}

/// Scans paragraphs in order and emits a record for every paragraph with at
/// least one match. Paragraph ids are the zero-based line positions in the
/// corpus, counting paragraphs without matches too.
///
/// Paragraphs are processed in batches of `batch_size`, each batch scanned
/// in parallel; records are emitted in corpus order.
pub fn build_keys2paragraph<I, F>(corpus: I, matcher: &PatternSet, batch_size: usize, mut sink: F) -> Result<u64>
where
    I: IntoIterator<Item = Result<String>>,
    F: FnMut(ParagraphRecord) -> Result<()>,
{
    let batch_size = batch_size.max(1);
    let mut next_id = 0u64;
    let mut emitted = 0u64;
    let mut batch: Vec<(u64, String)> = Vec::with_capacity(batch_size);
    let mut flush = |batch: &mut Vec<(u64, String)>, sink: &mut F| -> Result<()> {
        let records: Vec<Option<ParagraphRecord>> = batch
            .par_drain(..)
            .map(|(id, text)| {
                let occurrences = matcher.scan_paragraph(&text);
                (!occurrences.is_empty()).then_some(ParagraphRecord { id, text, occurrences })
            })
            .collect();
        for r in records.into_iter().flatten() {
            emitted += 1;
            sink(r)?;
        }
        Ok(())
    };
    for text in corpus {
        batch.push((next_id, sanitize_field(&text?)));
        next_id += 1;
        if batch.len() == batch_size {
            flush(&mut batch, &mut sink)?;
        }
    }
    flush(&mut batch, &mut sink)?;
    Ok(emitted)
}

/// Collecting form of [`build_keys2paragraph`].
pub fn collect_keys2paragraph<I>(corpus: I, matcher: &PatternSet) -> Result<Vec<ParagraphRecord>>
where
    I: IntoIterator<Item = String>,
{
    let mut out = Vec::new();
    build_keys2paragraph(corpus.into_iter().map(Ok), matcher, 1024, |r| {
        out.push(r);
        Ok(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Phrase {
        Phrase::new(s).unwrap()
    }

    #[test]
    fn finds_congo_in_river() {
        let m = PatternSet::new([p("congo")]).unwrap();
        let occ = m.scan_paragraph("the Congo river");
        assert_eq!(occ.len(), 1);
        assert_eq!(occ[0].span, Span::new(4, 9));
        assert!(occ[0].uppercase_start);
    }

    #[test]
    fn empty_set_rejected() {
        assert!(matches!(PatternSet::new(Vec::new()), Err(Error::EmptyPatternSet)));
    }

    #[test]
    fn duplicates_collapse() {
        let m = PatternSet::new([p("congo"), p("congo")]).unwrap();
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn no_match_inside_words() {
        let m = PatternSet::new([p("congo"), p("go")]).unwrap();
        assert!(m.scan_paragraph("Congolese cargo").is_empty());
        assert!(m.scan_paragraph("").is_empty());
    }

    #[test]
    fn mbesa_paragraph() {
        let m = PatternSet::new(["mbesa", "bantu", "republic of the congo", "congo", "eufaula"].map(p)).unwrap();
        let occ = m.scan_paragraph("Mbesa is a Bantu language of the Democratic Republic of the Congo.");
        let keys: Vec<&str> = occ.iter().map(|o| o.key.as_str()).collect();
        assert_eq!(keys, ["mbesa", "bantu", "republic of the congo", "congo"]);
        assert!(occ.iter().all(|o| o.uppercase_start));
    }

    #[test]
    fn sequential_ids() {
        let m = PatternSet::new([p("congo")]).unwrap();
        let recs =
            collect_keys2paragraph(vec!["nothing here".to_string(), "the congo\tbasin".to_string()], &m).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].id, 1);
        assert_eq!(recs[0].text, "the congo basin");
    }
}
