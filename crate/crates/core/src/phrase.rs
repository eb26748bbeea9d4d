//! Phrases and the character rules shared by every stage.
//!
//! All offsets in this crate are counted in Unicode scalar values, never in
//! bytes. Lowercasing is done per character with a one-to-one mapping so that
//! offsets computed on lowercased text are valid on the original text.

use std::borrow::Borrow;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Characters that may form a word: letters, digits and the apostrophe.
#[inline]
pub fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\''
}

/// Lowercases a single character, keeping it unchanged when its lowercase
/// form is longer than one character.
#[inline]
pub fn lower_char(c: char) -> char {
    let mut it = c.to_lowercase();
    match (it.next(), it.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}

pub fn lowercase_chars(text: &str) -> Vec<char> {
    text.chars().map(lower_char).collect()
}

#[inline]
fn is_phrase_char(c: char) -> bool {
    c == '\'' || (c.is_alphanumeric() && !c.is_uppercase())
}

/// Half-open character range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn intersection_len(&self, other: &Span) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        hi.saturating_sub(lo)
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.start, self.end)
    }
}

/// True when `[start, end)` over `chars` is delimited by non-word characters
/// or the text edges.
#[inline]
pub fn is_boundary_aligned(chars: &[char], start: usize, end: usize) -> bool {
    let left = start == 0 || !is_word_char(chars[start - 1]);
    let right = end == chars.len() || !is_word_char(chars[end]);
    left && right
}

/// A lowercase, single-space separated word sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Phrase(String);

impl Phrase {
    /// Validates `text` against the phrase invariants without altering it.
    pub fn new(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if Self::is_valid(&text) {
            Ok(Phrase(text))
        } else {
            Err(Error::InvalidPhrase(text))
        }
    }

    /// Ingest normalization: lowercase, every run of non-word characters
    /// becomes a single space, edges trimmed. Returns `None` if nothing is
    /// left.
    pub fn normalize(raw: &str) -> Option<Self> {
        let mut out = String::with_capacity(raw.len());
        let mut pending_space = false;
        for c in raw.chars().map(lower_char) {
            if is_phrase_char(c) {
                if pending_space && !out.is_empty() {
                    out.push(' ');
                }
                pending_space = false;
                out.push(c);
            } else {
                pending_space = true;
            }
        }
        if out.is_empty() {
            None
        } else {
            Some(Phrase(out))
        }
    }

    pub fn is_valid(text: &str) -> bool {
        if text.is_empty() || text.starts_with(' ') || text.ends_with(' ') {
            return false;
        }
        let mut prev_space = false;
        for c in text.chars() {
            if c == ' ' {
                if prev_space {
                    return false;
                }
                prev_space = true;
            } else if is_phrase_char(c) {
                prev_space = false;
            } else {
                return false;
            }
        }
        true
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn words(&self) -> impl DoubleEndedIterator<Item = &str> + '_ {
        self.0.split(' ')
    }

    pub fn word_count(&self) -> usize {
        self.0.split(' ').count()
    }

    pub fn first_word(&self) -> &str {
        self.words().next().unwrap_or_default()
    }

    pub fn last_word(&self) -> &str {
        self.words().next_back().unwrap_or_default()
    }

    pub fn char_len(&self) -> usize {
        self.0.chars().count()
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Phrase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Phrase {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Phrase {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Phrase {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Phrase::new(value)
    }
}

impl From<Phrase> for String {
    fn from(p: Phrase) -> String {
        p.0
    }
}

/// Replaces tabs, carriage returns and newlines by single spaces.
pub fn sanitize_field(text: &str) -> String {
    text.chars().map(|c| if matches!(c, '\t' | '\n' | '\r') { ' ' } else { c }).collect()
}

/// Start offsets of every boundary-aligned occurrence of `needle` in
/// `haystack`, both already lowercased. Linear in `haystack` per start.
pub fn find_boundary_occurrences(haystack: &[char], needle: &[char]) -> Vec<usize> {
    if needle.is_empty() || needle.len() > haystack.len() {
        return Vec::new();
    }
    (0..=haystack.len() - needle.len())
        .filter(|&s| haystack[s..s + needle.len()] == *needle && is_boundary_aligned(haystack, s, s + needle.len()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_strips_punctuation_and_case() {
        let p = Phrase::normalize("  Republic of the   Congo. ").unwrap();
        assert_eq!(p.as_str(), "republic of the congo");
        assert_eq!(p.word_count(), 4);
        assert!(Phrase::normalize(" -- ").is_none());
        assert_eq!(Phrase::normalize("O'Brien").unwrap().as_str(), "o'brien");
    }

    #[test]
    fn validation() {
        assert!(Phrase::new("band to").is_ok());
        assert!(Phrase::new("Band to").is_err());
        assert!(Phrase::new("band  to").is_err());
        assert!(Phrase::new(" band").is_err());
        assert!(Phrase::new("").is_err());
        assert!(Phrase::new("a\tb").is_err());
        assert!(Phrase::new("u.s.").is_err());
    }

    #[test]
    fn boundary() {
        let chars = lowercase_chars("the Congolese congo");
        assert!(!is_boundary_aligned(&chars, 4, 9));
        assert!(is_boundary_aligned(&chars, 14, 19));
        assert!(is_boundary_aligned(&chars, 0, 3));
    }
}
