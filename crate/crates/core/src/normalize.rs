//! Dictionary-based written-to-spoken normalization.
//!
//! Text is split on whitespace. Scanning left to right, the longest word
//! n-gram found in the dictionary is replaced by its spoken form and the
//! scan resumes after it. A token that matches nothing is copied; if it
//! holds characters a recognizer would never emit (digits, symbols), its
//! output span is reported as a skip span.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::corpus::tsv::LineReader;
use crate::error::{Error, Result};
use crate::phrase::{Phrase, Span};

/// Punctuation that a token may carry at its end and still match the
/// dictionary entry without it.
const TRAILING_PUNCT: &[char] = &[',', '.', ';', ':', '!', '?'];

fn is_plain_char(c: char) -> bool {
    c.is_alphabetic() || matches!(c, '\'' | '.' | ',' | ';' | ':' | '!' | '?' | '"' | '(' | ')' | '-')
}

/// Whether a token left as is would contain text a recognizer cannot
/// produce.
pub fn needs_normalization(token: &str) -> bool {
    !token.chars().all(is_plain_char)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NormalizationDict {
    entries: HashMap<String, (Phrase, u64)>,
    max_order: usize,
}

impl NormalizationDict {
    /// Builds the dictionary from `(written, spoken, frequency)` rows:
    /// frequencies of repeated pairs are summed, then each written form keeps
    /// its most frequent spoken form (ties to the lexicographically smallest).
    pub fn from_rows(rows: impl IntoIterator<Item = (String, Phrase, u64)>) -> Result<Self> {
        let mut agg: BTreeMap<String, BTreeMap<Phrase, u64>> = BTreeMap::new();
        for (written, spoken, freq) in rows {
            let key = written.split_whitespace().collect::<Vec<_>>().join(" ");
            if key.is_empty() {
                return Err(Error::InvalidRecord("empty written form".into()));
            }
            *agg.entry(key).or_default().entry(spoken).or_default() += freq;
        }
        let mut entries = HashMap::with_capacity(agg.len());
        let mut max_order = 0;
        for (written, spoken) in agg {
            // BTreeMap order makes the first maximum the smallest spoken form.
            let (best, freq) = spoken
                .into_iter()
                .fold(None::<(Phrase, u64)>, |acc, (s, f)| match acc {
                    Some((_, bf)) if bf >= f => acc,
                    _ => Some((s, f)),
                })
                .expect("at least one spoken form");
            max_order = max_order.max(written.split(' ').count());
            entries.insert(written, (best, freq));
        }
        Ok(NormalizationDict { entries, max_order })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn get(&self, written: &str) -> Option<&Phrase> {
        self.entries.get(written).map(|(p, _)| p)
    }

    pub fn entry(&self, written: &str) -> Option<(&Phrase, u64)> {
        self.entries.get(written).map(|(p, f)| (p, *f))
    }

    pub fn written_forms(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.keys().map(String::as_str)
    }

    /// Replacement for `tokens`, if any: the exact n-gram, else the n-gram
    /// with trailing punctuation removed from its last token (the punctuation
    /// is kept after the spoken form).
    fn lookup(&self, tokens: &[&str], key: &mut String) -> Option<String> {
        key.clear();
        for (i, t) in tokens.iter().enumerate() {
            if i > 0 {
                key.push(' ');
            }
            key.push_str(t);
        }
        if let Some((p, _)) = self.entries.get(key.as_str()) {
            return Some(p.as_str().to_string());
        }
        let last = tokens[tokens.len() - 1];
        let core = last.trim_end_matches(TRAILING_PUNCT);
        if core.len() == last.len() || core.is_empty() {
            return None;
        }
        let tail = &last[core.len()..];
        key.truncate(key.len() - tail.len());
        self.entries.get(key.as_str()).map(|(p, _)| format!("{}{tail}", p.as_str()))
    }
}

/// Loads a `written \t spoken \t frequency` TSV.
pub fn load_dictionary(path: &Path) -> Result<NormalizationDict> {
    let mut rows = Vec::new();
    for item in LineReader::open(path)? {
        let (line, text) = item?;
        let err = |m: String| Error::Schema { path: path.to_path_buf(), line, message: m };
        let f: Vec<&str> = text.split('\t').collect();
        if f.len() != 3 {
            return Err(err(format!("expected 3 columns, found {}", f.len())));
        }
        if f[0].trim().is_empty() {
            return Err(err("empty written form".into()));
        }
        let spoken = Phrase::new(f[1]).map_err(|e| err(e.to_string()))?;
        let freq: u64 = f[2].parse().map_err(|_| err(format!("bad frequency {:?}", f[2])))?;
        rows.push((f[0].to_string(), spoken, freq));
    }
    NormalizationDict::from_rows(rows)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NormalizedText {
    pub text: String,
    /// Output spans of tokens that could not be normalized; sorted and
    /// disjoint.
    pub skip_spans: Vec<Span>,
}

/// Greedy leftmost-longest normalization of `text`.
pub fn normalize_text(dict: &NormalizationDict, text: &str) -> NormalizedText {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let mut out = String::with_capacity(text.len());
    let mut out_chars = 0usize;
    let mut skip_spans = Vec::new();
    let mut key = String::new();
    let mut i = 0;
    let mut push = |piece: &str, skip: bool, out: &mut String| {
        if !out.is_empty() {
            out.push(' ');
            out_chars += 1;
        }
        let n = piece.chars().count();
        if skip {
            skip_spans.push(Span::new(out_chars, out_chars + n));
        }
        out.push_str(piece);
        out_chars += n;
    };
    while i < tokens.len() {
        let longest = dict.max_order().min(tokens.len() - i);
        let hit = (1..=longest).rev().find_map(|n| dict.lookup(&tokens[i..i + n], &mut key).map(|r| (n, r)));
        match hit {
            Some((n, replacement)) => {
                push(&replacement, false, &mut out);
                i += n;
            }
            None => {
                push(tokens[i], needs_normalization(tokens[i]), &mut out);
                i += 1;
            }
        }
    }
    NormalizedText { text: out, skip_spans }
}

/// Sidecar form of skip spans: `start-end` pairs joined by `,`, empty when
/// there are none.
pub fn format_skip_spans(spans: &[Span]) -> String {
    spans.iter().map(|s| format!("{}-{}", s.start, s.end)).collect::<Vec<_>>().join(",")
}

pub fn parse_skip_spans(s: &str) -> Result<Vec<Span>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| {
            let (a, b) = p.split_once('-').ok_or_else(|| Error::InvalidRecord(format!("bad span {p:?}")))?;
            let a: usize = a.parse().map_err(|_| Error::InvalidRecord(format!("bad span {p:?}")))?;
            let b: usize = b.parse().map_err(|_| Error::InvalidRecord(format!("bad span {p:?}")))?;
            if a > b {
                return Err(Error::InvalidRecord(format!("inverted span {p:?}")));
            }
            Ok(Span::new(a, b))
        })
        .collect()
}
