use std::collections::{BTreeSet, HashMap};

use rand::Rng;

use super::SamplingStrategy;
use crate::corpus::{ParagraphRecord, Substitution};
use crate::error::{Error, Result};
use crate::inventory::{Inventory, Variant};
use crate::phrase::{is_word_char, lower_char, Phrase, Span};

/// A word of the paragraph: a maximal run of word characters, lowercased.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Word {
    text: String,
    span: Span,
    /// Overlaps an unnormalized fragment, or is not a valid phrase word.
    skip: bool,
}

fn split_words(text: &str, skip_spans: &[Span]) -> Vec<Word> {
    let mut words = Vec::new();
    let mut start = None;
    let chars: Vec<char> = text.chars().collect();
    for i in 0..=chars.len() {
        let w = i < chars.len() && is_word_char(chars[i]);
        match (start, w) {
            (None, true) => start = Some(i),
            (Some(s), false) => {
                let span = Span::new(s, i);
                let text: String = chars[s..i].iter().copied().map(lower_char).collect();
                let skip = skip_spans.iter().any(|k| k.overlaps(&span)) || !Phrase::is_valid(&text);
                words.push(Word { text, span, skip });
                start = None;
            }
            _ => {}
        }
    }
    words
}

/// A key occurrence inside a snippet, as a word range `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnippetOccurrence {
    pub key: Phrase,
    pub words: (usize, usize),
}

/// A window of lowercased paragraph words with the non-overlapping key
/// occurrences it contains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snippet {
    pub words: Vec<String>,
    pub occurrences: Vec<SnippetOccurrence>,
}

impl Snippet {
    pub fn text(&self) -> String {
        self.words.join(" ")
    }
}

/// Cuts a snippet around a randomly chosen key occurrence.
///
/// `record.text` must be the normalized paragraph and `skip_spans` its
/// unnormalized fragments. The window length is drawn uniformly from the
/// strategy's word range; a shorter skip-free stretch around the chosen
/// occurrence is returned whole. Overlapping occurrences in the window are
/// resolved leftmost-longest.
pub fn cut_snippet<R: Rng + ?Sized>(
    record: &ParagraphRecord,
    skip_spans: &[Span],
    strategy: &SamplingStrategy,
    rng: &mut R,
) -> Result<Snippet> {
    let words = split_words(&record.text, skip_spans);
    let starts: HashMap<usize, usize> = words.iter().enumerate().map(|(i, w)| (w.span.start, i)).collect();
    let ends: HashMap<usize, usize> = words.iter().enumerate().map(|(i, w)| (w.span.end, i + 1)).collect();

    // Occurrences as word ranges, keeping those made of clean words that
    // read exactly as the key.
    let mut occ: Vec<SnippetOccurrence> = record
        .occurrences
        .iter()
        .filter_map(|o| {
            let a = *starts.get(&o.span.start)?;
            let b = *ends.get(&o.span.end)?;
            let ws = &words[a..b];
            let clean = ws.iter().all(|w| !w.skip)
                && ws.iter().map(|w| w.text.as_str()).collect::<Vec<_>>().join(" ") == o.key.as_str();
            clean.then(|| SnippetOccurrence { key: o.key.clone(), words: (a, b) })
        })
        .collect();
    occ.sort_by(|x, y| x.words.0.cmp(&y.words.0).then(y.words.1.cmp(&x.words.1)).then_with(|| x.key.cmp(&y.key)));
    occ.dedup();
    if occ.is_empty() {
        return Err(Error::NoValidWindow);
    }

    let [lo, hi] = strategy.snippet_word_range;
    let len = rng.gen_range(lo..=hi);
    let chosen = &occ[rng.gen_range(0..occ.len())];
    let (a, b) = chosen.words;
    let mut seg_start = a;
    while seg_start > 0 && !words[seg_start - 1].skip {
        seg_start -= 1;
    }
    let mut seg_end = b;
    while seg_end < words.len() && !words[seg_end].skip {
        seg_end += 1;
    }
    let len = len.max(b - a);
    let (ws, we) = if seg_end - seg_start <= len {
        (seg_start, seg_end)
    } else {
        let first = seg_start.max(b.saturating_sub(len));
        let last = a.min(seg_end - len);
        let s = rng.gen_range(first..=last);
        (s, s + len)
    };

    let mut taken: Vec<SnippetOccurrence> = Vec::new();
    for o in occ.iter().filter(|o| ws <= o.words.0 && o.words.1 <= we) {
        if taken.last().is_none_or(|t| t.words.1 <= o.words.0) {
            taken.push(SnippetOccurrence { key: o.key.clone(), words: (o.words.0 - ws, o.words.1 - ws) });
        }
    }
    Ok(Snippet { words: words[ws..we].iter().map(|w| w.text.clone()).collect(), occurrences: taken })
}

/// Original and corrupted snippet texts with the substitutions linking them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorruptedSnippet {
    pub original: String,
    pub corrupted: String,
    pub substitutions: Vec<Substitution>,
}

fn sample_variant<'a, R: Rng + ?Sized>(
    variants: impl Iterator<Item = &'a Variant> + Clone,
    rng: &mut R,
) -> Option<&'a Variant> {
    let total: u64 = variants.clone().map(|v| v.total).sum();
    if total == 0 {
        return None;
    }
    let mut r = rng.gen_range(0..total);
    for v in variants {
        if r < v.total {
            return Some(v);
        }
        r -= v.total;
    }
    unreachable!("draw below total")
}

/// Replaces each occurrence with a recognized variant drawn in proportion to
/// its count.
///
/// A drawn self-replacement is kept when the strategy allows it; otherwise
/// the draw is repeated among the other variants, and the occurrence is left
/// untouched if there are none. At most
/// [`SamplingStrategy::max_positives`] distinct keys are substituted so that
/// every positive fits in the biasing list.
pub fn corrupt_snippet<R: Rng + ?Sized>(
    snippet: &Snippet,
    inv: &Inventory,
    strategy: &SamplingStrategy,
    rng: &mut R,
) -> Result<CorruptedSnippet> {
    let mut chosen: Vec<Option<Phrase>> = Vec::with_capacity(snippet.occurrences.len());
    let mut keys = BTreeSet::new();
    for o in &snippet.occurrences {
        let variants = inv.variants(o.key.as_str()).ok_or_else(|| Error::MissingKey(o.key.to_string()))?;
        if !keys.contains(&o.key) && keys.len() >= strategy.max_positives() {
            chosen.push(None);
            continue;
        }
        let mut pick = sample_variant(variants.iter(), rng);
        if !strategy.allow_self_replacement && pick.is_some_and(|v| v.recog == o.key) {
            pick = sample_variant(variants.iter().filter(|v| v.recog != o.key), rng);
        }
        if pick.is_some() {
            keys.insert(o.key.clone());
        }
        chosen.push(pick.map(|v| v.recog.clone()));
    }

    let mut original = String::new();
    let mut corrupted = String::new();
    let (mut olen, mut clen) = (0usize, 0usize);
    let mut substitutions = Vec::new();
    let push = |out: &mut String, len: &mut usize, s: &str| {
        if !out.is_empty() {
            out.push(' ');
            *len += 1;
        }
        out.push_str(s);
        *len += s.chars().count();
    };
    let mut next = snippet.occurrences.iter().zip(&chosen).peekable();
    let mut i = 0;
    while i < snippet.words.len() {
        match next.peek() {
            Some((o, pick)) if o.words.0 == i => {
                let (o, pick) = (*o, *pick);
                next.next();
                let Some(recog) = pick else { continue };
                let (os, cs) = (olen + usize::from(olen > 0), clen + usize::from(clen > 0));
                push(&mut original, &mut olen, o.key.as_str());
                push(&mut corrupted, &mut clen, recog.as_str());
                substitutions.push(Substitution {
                    orig_span: Span::new(os, olen),
                    corrupted_span: Span::new(cs, clen),
                    orig: o.key.clone(),
                    corrupted: recog.clone(),
                });
                i = o.words.1;
            }
            _ => {
                push(&mut original, &mut olen, &snippet.words[i]);
                push(&mut corrupted, &mut clen, &snippet.words[i]);
                i += 1;
            }
        }
    }
    Ok(CorruptedSnippet { original, corrupted, substitutions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorruptionPair, SourceId};
    use crate::inventory::merge_sources;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> Phrase {
        Phrase::new(s).unwrap()
    }

    fn inv(rows: &[(&str, &str, u64)]) -> Inventory {
        merge_sources([rows
            .iter()
            .map(|(o, r, n)| CorruptionPair::new(p(o), p(r), *n, SourceId::new("asr_a").unwrap()).unwrap())
            .collect::<Vec<_>>()])
        .unwrap()
    }

    fn record(text: &str, keys: &[&str]) -> ParagraphRecord {
        let keys: Vec<Phrase> = keys.iter().map(|k| p(k)).collect();
        ParagraphRecord::from_keys(0, text.to_string(), &keys)
    }

    const MBESA: &str = "Mbesa is a Bantu language of the Democratic Republic of the Congo.";

    #[test]
    fn short_paragraph_is_returned_whole() {
        let r = record("The Congo river.", &["congo"]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = cut_snippet(&r, &[], &SamplingStrategy::default(), &mut rng).unwrap();
        assert_eq!(s.text(), "the congo river");
        assert_eq!(s.occurrences, vec![SnippetOccurrence { key: p("congo"), words: (1, 2) }]);
    }

    #[test]
    fn key_inside_skip_span_is_rejected() {
        let r = record("Route Congo99 and congo", &["congo"]);
        // Only the second "congo" is a boundary match; cover it with a skip span.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = cut_snippet(&r, &[Span::new(18, 23)], &SamplingStrategy::default(), &mut rng);
        assert!(matches!(e, Err(Error::NoValidWindow)));
    }

    #[test]
    fn nested_keys_resolve_leftmost_longest() {
        let r = record(MBESA, &["bantu", "republic of the congo", "congo", "mbesa"]);
        let strategy = SamplingStrategy { snippet_word_range: [25, 25], ..SamplingStrategy::default() };
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = cut_snippet(&r, &[], &strategy, &mut rng).unwrap();
            let keys: Vec<&str> = s.occurrences.iter().map(|o| o.key.as_str()).collect();
            assert_eq!(keys, ["mbesa", "bantu", "republic of the congo"]);
        }
    }

    #[test]
    fn window_never_crosses_skip_words() {
        let text = "one two three 4444 congo five six seven eight nine ten eleven twelve";
        let r = record(text, &["congo"]);
        let strategy = SamplingStrategy { snippet_word_range: [3, 3], ..SamplingStrategy::default() };
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = cut_snippet(&r, &[Span::new(14, 18)], &strategy, &mut rng).unwrap();
            assert_eq!(s.words.len(), 3);
            assert_eq!(s.words[0], "congo");
        }
    }

    #[test]
    fn table_four_substitution() {
        let inv = inv(&[("discworld noir", "discorled nowhere", 1), ("lovecraftian", "low crash and", 1)]);
        let r = record(
            "discworld noir transitions into more dark fantasy and lovecraftian horror",
            &["discworld noir", "lovecraftian"],
        );
        let strategy = SamplingStrategy { snippet_word_range: [25, 25], ..SamplingStrategy::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = cut_snippet(&r, &[], &strategy, &mut rng).unwrap();
        let c = corrupt_snippet(&s, &inv, &strategy, &mut rng).unwrap();
        assert_eq!(c.original, "discworld noir transitions into more dark fantasy and lovecraftian horror");
        assert_eq!(c.corrupted, "discorled nowhere transitions into more dark fantasy and low crash and horror");
        assert_eq!(c.substitutions.len(), 2);
        assert_eq!(c.substitutions[1].corrupted_span, Span::new(57, 70));
        assert_eq!(c.substitutions[1].orig_span, Span::new(54, 66));
    }

    #[test]
    fn self_only_variant() {
        let inv = inv(&[("congo", "congo", 133)]);
        let r = record("the congo basin", &["congo"]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let strategy = SamplingStrategy::default();
        let s = cut_snippet(&r, &[], &strategy, &mut rng).unwrap();
        let c = corrupt_snippet(&s, &inv, &strategy, &mut rng).unwrap();
        assert_eq!(c.corrupted, c.original);
        assert!(c.substitutions[0].is_self_replacement());

        let no_self = SamplingStrategy { allow_self_replacement: false, ..strategy };
        let c = corrupt_snippet(&s, &inv, &no_self, &mut rng).unwrap();
        assert_eq!(c.corrupted, c.original);
        assert!(c.substitutions.is_empty());
    }

    #[test]
    fn missing_key() {
        let r = record("the congo basin", &["congo"]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = cut_snippet(&r, &[], &SamplingStrategy::default(), &mut rng).unwrap();
        let e = corrupt_snippet(&s, &inv(&[("bantu", "band to", 1)]), &SamplingStrategy::default(), &mut rng);
        assert!(matches!(e, Err(Error::MissingKey(_))));
    }
}
