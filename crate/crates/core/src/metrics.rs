//! Evaluation measures: word and character error rates, biasing-phrase
//! precision and recall, and the share of transcriptions a corrector
//! changed.

use crate::error::{Error, Result};
use crate::index::PatternSet;
use crate::phrase::lower_char;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ErrorCounts {
    pub substitutions: u64,
    pub insertions: u64,
    pub deletions: u64,
    pub reference_length: u64,
}

impl ErrorCounts {
    pub fn edits(&self) -> u64 {
        self.substitutions + self.insertions + self.deletions
    }

    /// Error rate in percent; NaN for an empty reference.
    pub fn rate(&self) -> f64 {
        100.0 * self.edits() as f64 / self.reference_length as f64
    }

    pub fn add(&mut self, other: &ErrorCounts) {
        self.substitutions += other.substitutions;
        self.insertions += other.insertions;
        self.deletions += other.deletions;
        self.reference_length += other.reference_length;
    }
}

/// One step of an edit alignment; indices are into reference and hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditOp {
    Match(usize, usize),
    Substitute(usize, usize),
    Delete(usize),
    Insert(usize),
}

/// Minimum-edit alignment with unit costs. Among alignments with the fewest
/// edits the one with the fewest substitutions (most matches) is chosen,
/// which fixes the error counts uniquely.
pub fn align<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> (ErrorCounts, Vec<EditOp>) {
    let (n, m) = (reference.len(), hypothesis.len());
    let w = m + 1;
    // cost[i * w + j] = (edits, substitutions) aligning ref[..i] with hyp[..j].
    let mut cost = vec![(0u32, 0u32); (n + 1) * w];
    for i in 0..=n {
        for j in 0..=m {
            cost[i * w + j] = match (i, j) {
                (0, _) => (j as u32, 0),
                (_, 0) => (i as u32, 0),
                _ => {
                    let (e, s) = cost[(i - 1) * w + j - 1];
                    let diag = if reference[i - 1] == hypothesis[j - 1] { (e, s) } else { (e + 1, s + 1) };
                    let (e, s) = cost[(i - 1) * w + j];
                    let del = (e + 1, s);
                    let (e, s) = cost[i * w + j - 1];
                    let ins = (e + 1, s);
                    diag.min(del).min(ins)
                }
            };
        }
    }
    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = cost[i * w + j];
        if i > 0 && j > 0 {
            let (e, s) = cost[(i - 1) * w + j - 1];
            if reference[i - 1] == hypothesis[j - 1] && here == (e, s) {
                ops.push(EditOp::Match(i - 1, j - 1));
                i -= 1;
                j -= 1;
                continue;
            }
            if reference[i - 1] != hypothesis[j - 1] && here == (e + 1, s + 1) {
                ops.push(EditOp::Substitute(i - 1, j - 1));
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && here == (cost[(i - 1) * w + j].0 + 1, cost[(i - 1) * w + j].1) {
            ops.push(EditOp::Delete(i - 1));
            i -= 1;
        } else {
            ops.push(EditOp::Insert(j - 1));
            j -= 1;
        }
    }
    ops.reverse();
    let mut counts = ErrorCounts { reference_length: n as u64, ..ErrorCounts::default() };
    for op in &ops {
        match op {
            EditOp::Match(..) => {}
            EditOp::Substitute(..) => counts.substitutions += 1,
            EditOp::Delete(_) => counts.deletions += 1,
            EditOp::Insert(_) => counts.insertions += 1,
        }
    }
    (counts, ops)
}

/// Word-level error counts over whitespace tokens.
pub fn word_error_rate(reference: &str, hypothesis: &str) -> Result<ErrorCounts> {
    let r: Vec<&str> = reference.split_whitespace().collect();
    if r.is_empty() {
        return Err(Error::EmptyReference);
    }
    let h: Vec<&str> = hypothesis.split_whitespace().collect();
    Ok(align(&r, &h).0)
}

/// Character-level error counts; spaces are characters too.
pub fn char_error_rate(reference: &str, hypothesis: &str) -> Result<ErrorCounts> {
    let r: Vec<char> = reference.chars().collect();
    if r.is_empty() {
        return Err(Error::EmptyReference);
    }
    let h: Vec<char> = hypothesis.chars().collect();
    Ok(align(&r, &h).0)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PrecisionRecall {
    pub reference_occurrences: u64,
    pub reference_hits: u64,
    pub hypothesis_occurrences: u64,
    pub hypothesis_hits: u64,
}

impl PrecisionRecall {
    /// Recall, with 1.0 when there is nothing to recall.
    pub fn recall(&self) -> f64 {
        ratio(self.reference_hits, self.reference_occurrences)
    }

    /// Precision, with 1.0 when the hypotheses contain no vocabulary phrase.
    pub fn precision(&self) -> f64 {
        ratio(self.hypothesis_hits, self.hypothesis_occurrences)
    }

    pub fn recall_undefined(&self) -> bool {
        self.reference_occurrences == 0
    }

    pub fn precision_undefined(&self) -> bool {
        self.hypothesis_occurrences == 0
    }

    pub fn add(&mut self, o: &PrecisionRecall) {
        self.reference_occurrences += o.reference_occurrences;
        self.reference_hits += o.reference_hits;
        self.hypothesis_occurrences += o.hypothesis_occurrences;
        self.hypothesis_hits += o.hypothesis_hits;
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        1.0
    } else {
        a as f64 / b as f64
    }
}

/// Vocabulary occurrences in `tokens` as token ranges `[start, end)`.
fn occurrences(tokens: &[String], vocab: &PatternSet) -> Vec<(usize, usize)> {
    let text = tokens.join(" ");
    let mut token_of = Vec::with_capacity(text.len());
    for (t, tok) in tokens.iter().enumerate() {
        token_of.extend(std::iter::repeat_n(t, tok.chars().count() + 1));
    }
    let lower: Vec<char> = text.chars().collect();
    vocab
        .hits_in(&lower, &mut Default::default())
        .into_iter()
        .map(|h| (token_of[h.span.start], token_of[h.span.end - 1] + 1))
        .collect()
}

fn tokens(s: &str) -> Vec<String> {
    s.split_whitespace().map(|t| t.chars().map(lower_char).collect()).collect()
}

/// For each reference token, the hypothesis token it matches exactly.
fn match_maps(r: &[String], h: &[String]) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
    let mut r2h = vec![None; r.len()];
    let mut h2r = vec![None; h.len()];
    for op in align(r, h).1 {
        if let EditOp::Match(i, j) = op {
            r2h[i] = Some(j);
            h2r[j] = Some(i);
        }
    }
    (r2h, h2r)
}

/// Whether every token of `[a, b)` is matched, onto consecutive tokens.
fn aligned(map: &[Option<usize>], (a, b): (usize, usize)) -> bool {
    let Some(first) = map[a] else { return false };
    (a..b).all(|i| map[i] == Some(first + (i - a)))
}

/// Biasing-phrase recall and precision of one reference/hypothesis pair.
///
/// Vocabulary occurrences are word-boundary matches in the lowercased
/// texts. A reference occurrence is recalled when each of its words is
/// matched, in order and contiguously, by the word alignment; a hypothesis
/// occurrence is correct under the same condition from the other side.
pub fn pair_precision_recall(reference: &str, hypothesis: &str, vocab: &PatternSet) -> PrecisionRecall {
    let (r, h) = (tokens(reference), tokens(hypothesis));
    let (r2h, h2r) = match_maps(&r, &h);
    let ro = occurrences(&r, vocab);
    let ho = occurrences(&h, vocab);
    PrecisionRecall {
        reference_occurrences: ro.len() as u64,
        reference_hits: ro.iter().filter(|&&o| aligned(&r2h, o)).count() as u64,
        hypothesis_occurrences: ho.len() as u64,
        hypothesis_hits: ho.iter().filter(|&&o| aligned(&h2r, o)).count() as u64,
    }
}

/// Corpus-level precision and recall.
///
/// With `baseline`, recall counts only the reference occurrences that the
/// baseline transcription missed, i.e. credit goes to corrections alone;
/// precision is unchanged.
pub fn biasing_precision_recall<S: AsRef<str>>(
    references: &[S],
    hypotheses: &[S],
    vocab: &PatternSet,
    baseline: Option<&[S]>,
) -> Result<PrecisionRecall> {
    if references.len() != hypotheses.len() {
        return Err(Error::LengthMismatch { left: references.len(), right: hypotheses.len() });
    }
    if let Some(b) = baseline {
        if b.len() != references.len() {
            return Err(Error::LengthMismatch { left: references.len(), right: b.len() });
        }
    }
    let mut total = PrecisionRecall::default();
    for (n, (rs, hs)) in references.iter().zip(hypotheses).enumerate() {
        let Some(base) = baseline else {
            total.add(&pair_precision_recall(rs.as_ref(), hs.as_ref(), vocab));
            continue;
        };
        let (r, h, b) = (tokens(rs.as_ref()), tokens(hs.as_ref()), tokens(base[n].as_ref()));
        let (r2h, h2r) = match_maps(&r, &h);
        let (r2b, _) = match_maps(&r, &b);
        let missed: Vec<_> = occurrences(&r, vocab).into_iter().filter(|&o| !aligned(&r2b, o)).collect();
        let ho = occurrences(&h, vocab);
        total.add(&PrecisionRecall {
            reference_occurrences: missed.len() as u64,
            reference_hits: missed.iter().filter(|&&o| aligned(&r2h, o)).count() as u64,
            hypothesis_occurrences: ho.len() as u64,
            hypothesis_hits: ho.iter().filter(|&&o| aligned(&h2r, o)).count() as u64,
        });
    }
    Ok(total)
}

/// Percentage of positions where `corrected` differs from `baseline`; 0 for
/// empty streams.
pub fn changed_sentence_rate<S: AsRef<str>>(baseline: &[S], corrected: &[S]) -> Result<f64> {
    if baseline.len() != corrected.len() {
        return Err(Error::LengthMismatch { left: baseline.len(), right: corrected.len() });
    }
    if baseline.is_empty() {
        return Ok(0.0);
    }
    let changed = baseline.iter().zip(corrected).filter(|(a, b)| a.as_ref() != b.as_ref()).count();
    Ok(100.0 * changed as f64 / baseline.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phrase::Phrase;

    fn vocab(ps: &[&str]) -> PatternSet {
        PatternSet::new(ps.iter().map(|p| Phrase::new(*p).unwrap())).unwrap()
    }

    #[test]
    fn wer_hand_cases() {
        assert_eq!(word_error_rate("a b c", "a b c").unwrap().rate(), 0.0);
        let c = word_error_rate("a b c", "a x c d").unwrap();
        assert_eq!((c.substitutions, c.insertions, c.deletions), (1, 1, 0));
        assert!((c.rate() - 66.67).abs() < 0.005);
        assert!(matches!(word_error_rate("  ", "a"), Err(Error::EmptyReference)));
        assert_eq!(word_error_rate("a b", "").unwrap().deletions, 2);
    }

    #[test]
    fn swapped_words_prefer_matches() {
        let (c, ops) = align(&["a", "b"], &["b", "a"]);
        assert_eq!(c.edits(), 2);
        assert_eq!(c.substitutions, 0);
        assert_eq!(ops.iter().filter(|o| matches!(o, EditOp::Match(..))).count(), 1);
    }

    #[test]
    fn cer() {
        assert_eq!(char_error_rate("congo", "condo").unwrap().rate(), 20.0);
        assert_eq!(char_error_rate("a b", "ab").unwrap().deletions, 1);
    }

    #[test]
    fn precision_recall() {
        let v = vocab(&["congo", "bantu", "republic of the congo"]);
        let s = "the bantu people of the republic of the congo live near the congo";
        let pr = pair_precision_recall(s, s, &v);
        assert_eq!((pr.recall(), pr.precision()), (1.0, 1.0));
        // overlapping occurrences are all counted
        assert_eq!(pr.reference_occurrences, 4);

        let pr = pair_precision_recall("visit the congo", "visit the condo", &v);
        assert_eq!(pr.recall(), 0.0);
        assert!(pr.precision_undefined());
        assert_eq!(pr.precision(), 1.0);

        let pr = pair_precision_recall("the bantu speak", "the bantu congo speak", &v);
        assert_eq!((pr.recall(), pr.precision()), (1.0, 0.5));
    }

    #[test]
    fn baseline_restricts_recall() {
        let v = vocab(&["congo", "bantu"]);
        let refs = ["bantu of the congo"];
        let base = ["band to of the congo"];
        let hyp = ["bantu of the congo"];
        let pr = biasing_precision_recall(&refs, &hyp, &v, Some(&base)).unwrap();
        assert_eq!((pr.reference_occurrences, pr.reference_hits), (1, 1));
        let pr = biasing_precision_recall(&refs, &hyp, &v, None).unwrap();
        assert_eq!(pr.reference_occurrences, 2);
    }

    #[test]
    fn changed_rate() {
        assert_eq!(changed_sentence_rate(&["a", "b"], &["a", "b"]).unwrap(), 0.0);
        assert_eq!(changed_sentence_rate(&["a", "b", "c", "d"], &["a", "x", "c", "d"]).unwrap(), 25.0);
        assert!(changed_sentence_rate(&["a"], &[]).is_err());
    }
}
