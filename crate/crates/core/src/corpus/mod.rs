//! Shared record types and their table serialization.

pub mod tsv;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phrase::{find_boundary_occurrences, lowercase_chars, Phrase, Span};

pub use tsv::{read_table, write_table, TableKind, TableReader, TsvRecord};

/// Provenance of a corruption pair: the recognizer that produced it, or
/// [`SourceId::SUBPHRASE_EXPANSION`] for pairs derived by alignment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SourceId(String);

impl SourceId {
    pub const SUBPHRASE_EXPANSION: &'static str = "subphrase-expansion";

    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        let ok =
            !id.is_empty() && id.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-');
        if ok {
            Ok(SourceId(id))
        } else {
            Err(Error::InvalidRecord(format!("invalid source id {id:?}")))
        }
    }

    pub fn subphrase_expansion() -> Self {
        SourceId(Self::SUBPHRASE_EXPANSION.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for SourceId {
    type Error = Error;
    fn try_from(value: String) -> Result<Self> {
        SourceId::new(value)
    }
}

impl From<SourceId> for String {
    fn from(s: SourceId) -> String {
        s.0
    }
}

/// One row of the corruption inventory: a reference phrase, what a
/// recognizer produced for it, and how often.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CorruptionPair {
    pub orig: Phrase,
    pub recog: Phrase,
    pub count: u64,
    pub source: SourceId,
}

impl CorruptionPair {
    pub fn new(orig: Phrase, recog: Phrase, count: u64, source: SourceId) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidRecord(format!("zero count for {orig} -> {recog}")));
        }
        Ok(CorruptionPair { orig, recog, count, source })
    }

    pub fn is_self(&self) -> bool {
        self.orig == self.recog
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Occurrence {
    pub key: Phrase,
    pub span: Span,
    pub uppercase_start: bool,
}

/// A corpus paragraph and every occurrence of its keys.
///
/// Occurrences are sorted by start, then by descending length, and hold
/// every boundary-aligned match of each listed key. This lets the table form
/// store only the key list and recover spans on read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParagraphRecord {
    pub id: u64,
    pub text: String,
    pub occurrences: Vec<Occurrence>,
}

impl ParagraphRecord {
    /// Builds a record holding every occurrence of `keys` in `text`.
    pub fn from_keys<'a>(id: u64, text: String, keys: impl IntoIterator<Item = &'a Phrase>) -> Self {
        let chars: Vec<char> = text.chars().collect();
        let lower: Vec<char> = chars.iter().copied().map(crate::phrase::lower_char).collect();
        let mut occurrences = Vec::new();
        let mut seen = BTreeSet::new();
        for key in keys {
            if !seen.insert(key.clone()) {
                continue;
            }
            let needle: Vec<char> = key.as_str().chars().collect();
            for start in find_boundary_occurrences(&lower, &needle) {
                occurrences.push(Occurrence {
                    key: key.clone(),
                    span: Span::new(start, start + needle.len()),
                    uppercase_start: chars[start].is_uppercase(),
                });
            }
        }
        sort_occurrences(&mut occurrences);
        ParagraphRecord { id, text, occurrences }
    }

    /// Distinct keys in order of first occurrence.
    pub fn keys(&self) -> Vec<&Phrase> {
        let mut seen = BTreeSet::new();
        self.occurrences.iter().filter(|o| seen.insert(&o.key)).map(|o| &o.key).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.text.contains(['\t', '\n', '\r']) {
            return Err(Error::InvalidRecord("paragraph text contains a tab or newline".into()));
        }
        let lower = lowercase_chars(&self.text);
        for occ in &self.occurrences {
            if occ.span.end > lower.len() || occ.span.is_empty() {
                return Err(Error::InvalidRecord(format!("span {} out of bounds", occ.span)));
            }
            let s: String = lower[occ.span.start..occ.span.end].iter().collect();
            if s != occ.key.as_str() {
                return Err(Error::InvalidRecord(format!(
                    "span {} reads {s:?}, expected {:?}",
                    occ.span,
                    occ.key.as_str()
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn sort_occurrences(occ: &mut [Occurrence]) {
    occ.sort_by(|a, b| {
        a.span.start.cmp(&b.span.start).then(b.span.len().cmp(&a.span.len())).then_with(|| a.key.cmp(&b.key))
    });
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelatedPair {
    pub key: Phrase,
    pub related: Phrase,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FalsePositivePair {
    pub ngram: Phrase,
    pub phrase: Phrase,
    pub support: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CandidateLabel {
    Positive,
    Random,
    Related,
    FalsePositive,
}

impl CandidateLabel {
    pub fn tag(self) -> &'static str {
        match self {
            CandidateLabel::Positive => "pos",
            CandidateLabel::Random => "rnd",
            CandidateLabel::Related => "rel",
            CandidateLabel::FalsePositive => "fp",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "pos" => CandidateLabel::Positive,
            "rnd" => CandidateLabel::Random,
            "rel" => CandidateLabel::Related,
            "fp" => CandidateLabel::FalsePositive,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Candidate {
    pub phrase: Phrase,
    pub label: CandidateLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Substitution {
    pub orig_span: Span,
    pub corrupted_span: Span,
    pub orig: Phrase,
    pub corrupted: Phrase,
}

impl Substitution {
    pub fn is_self_replacement(&self) -> bool {
        self.orig == self.corrupted
    }
}

/// A corrupted hypothesis, its clean source and a labelled biasing list.
///
/// `char_tags[j]` is `i` when character `j` of the corrupted snippet belongs
/// to a substitution whose reference phrase is `candidates[i - 1]`, else 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingExample {
    pub original_snippet: String,
    pub corrupted_snippet: String,
    pub substitutions: Vec<Substitution>,
    pub candidates: Vec<Candidate>,
    pub char_tags: Vec<u8>,
}

impl TrainingExample {
    pub fn has_correct_candidate(&self) -> bool {
        self.candidates.iter().any(|c| c.label == CandidateLabel::Positive)
    }

    /// True when the hypothesis carries substitutions but no biasing entry
    /// names any of them.
    pub fn no_correct_candidate(&self) -> bool {
        !self.has_correct_candidate()
    }

    pub fn count_label(&self, label: CandidateLabel) -> usize {
        self.candidates.iter().filter(|c| c.label == label).count()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidRecord(m));
        let orig: Vec<char> = self.original_snippet.chars().collect();
        let corr: Vec<char> = self.corrupted_snippet.chars().collect();
        if self.original_snippet.contains(['\t', '\n']) || self.corrupted_snippet.contains(['\t', '\n']) {
            return bad("snippet contains a tab or newline".into());
        }
        if self.candidates.is_empty() || self.candidates.len() > u8::MAX as usize {
            return bad(format!("{} candidates", self.candidates.len()));
        }
        if self.char_tags.len() != corr.len() {
            return bad(format!("{} tags for {} characters", self.char_tags.len(), corr.len()));
        }
        let mut texts = BTreeSet::new();
        for c in &self.candidates {
            if !texts.insert(c.phrase.as_str()) {
                return bad(format!("duplicate candidate {:?}", c.phrase.as_str()));
            }
        }
        let positive_index: HashMap<&str, u8> = self
            .candidates
            .iter()
            .enumerate()
            .filter(|(_, c)| c.label == CandidateLabel::Positive)
            .map(|(i, c)| (c.phrase.as_str(), (i + 1) as u8))
            .collect();
        let mut expected = vec![0u8; corr.len()];
        for sub in &self.substitutions {
            let read = |chars: &[char], span: Span| -> Option<String> {
                (span.end <= chars.len())
                    .then(|| chars[span.start..span.end].iter().map(|&c| crate::phrase::lower_char(c)).collect())
            };
            if read(&orig, sub.orig_span).as_deref() != Some(sub.orig.as_str()) {
                return bad(format!("original span {} does not read {:?}", sub.orig_span, sub.orig.as_str()));
            }
            if read(&corr, sub.corrupted_span).as_deref() != Some(sub.corrupted.as_str()) {
                return bad(format!(
                    "corrupted span {} does not read {:?}",
                    sub.corrupted_span,
                    sub.corrupted.as_str()
                ));
            }
            if self.has_correct_candidate() {
                match positive_index.get(sub.orig.as_str()) {
                    Some(&i) => expected[sub.corrupted_span.start..sub.corrupted_span.end].fill(i),
                    None => return bad(format!("substituted {:?} is not a positive candidate", sub.orig.as_str())),
                }
            } else if texts.contains(sub.orig.as_str()) {
                return bad(format!("negative candidate duplicates reference {:?}", sub.orig.as_str()));
            }
        }
        if expected != self.char_tags {
            return bad("character tags disagree with substitutions".into());
        }
        Ok(())
    }
}

/// Inverse document frequencies for phrases and for the words they contain.
///
/// Phrases or words absent from the corpus have no entry; consumers treat a
/// missing score as infinitely rare.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IdfTable {
    pub doc_count: u64,
    pub scores: HashMap<Phrase, f64>,
    pub word_scores: HashMap<String, f64>,
    /// Fraction of a phrase's corpus occurrences that start with an
    /// uppercase character.
    pub uppercase_share: HashMap<Phrase, f64>,
}

impl IdfTable {
    pub fn phrase_idf(&self, phrase: &str) -> f64 {
        self.scores.get(phrase).copied().unwrap_or(f64::INFINITY)
    }

    pub fn word_idf(&self, word: &str) -> f64 {
        self.word_scores.get(word).copied().unwrap_or(f64::INFINITY)
    }
}
