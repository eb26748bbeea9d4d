use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::tsv::{create_writer, LineReader};
use crate::corpus::IdfTable;
use crate::error::{Error, Result};
use crate::index::{PatternSet, StepCounter};
use crate::phrase::{lower_char, Phrase};

#[derive(Default)]
struct Counts {
    docs: u64,
    df: Vec<u64>,
    occurrences: Vec<u64>,
    uppercase: Vec<u64>,
}

impl Counts {
    fn new(n: usize) -> Self {
        Counts { docs: 0, df: vec![0; n], occurrences: vec![0; n], uppercase: vec![0; n] }
    }

    fn add(&mut self, other: &Counts) {
        self.docs += other.docs;
        for (a, b) in self.df.iter_mut().zip(&other.df) {
            *a += b;
        }
        for (a, b) in self.occurrences.iter_mut().zip(&other.occurrences) {
            *a += b;
        }
        for (a, b) in self.uppercase.iter_mut().zip(&other.uppercase) {
            *a += b;
        }
    }
}

fn count_batch(matcher: &PatternSet, batch: &[String]) -> Counts {
    batch
        .par_chunks(256)
        .map(|chunk| {
            let mut c = Counts::new(matcher.len());
            let mut seen = vec![false; matcher.len()];
            let mut hit_ids = Vec::new();
            for text in chunk {
                c.docs += 1;
                let chars: Vec<char> = text.chars().collect();
                let lower: Vec<char> = chars.iter().copied().map(lower_char).collect();
                hit_ids.clear();
                for hit in matcher.hits_in(&lower, &mut StepCounter::default()) {
                    c.occurrences[hit.pattern] += 1;
                    if chars[hit.span.start].is_uppercase() {
                        c.uppercase[hit.pattern] += 1;
                    }
                    if !std::mem::replace(&mut seen[hit.pattern], true) {
                        hit_ids.push(hit.pattern);
                    }
                }
                for &id in &hit_ids {
                    c.df[id] += 1;
                    seen[id] = false;
                }
            }
            c
        })
        .reduce(
            || Counts::new(matcher.len()),
            |mut a, b| {
                a.add(&b);
                a
            },
        )
}

/// Document frequencies for `phrases` and all of their words over an
/// in-memory corpus.
pub fn compute_idf<I>(paragraphs: I, phrases: &BTreeSet<Phrase>) -> Result<IdfTable>
where
    I: IntoIterator<Item = String>,
{
    compute_idf_batched(paragraphs.into_iter().map(Ok), phrases, 8192)
}

/// `idf(t) = ln(|D| / |{d : t in d}|)` for every phrase and every word of
/// every phrase that occurs at least once, where `t in d` is a lowercase
/// word-boundary match.
///
/// The corpus is consumed in batches of `batch_size` paragraphs scanned in
/// parallel. Counts are integers so the result does not depend on how the
/// work is split.
pub fn compute_idf_batched<I>(paragraphs: I, phrases: &BTreeSet<Phrase>, batch_size: usize) -> Result<IdfTable>
where
    I: IntoIterator<Item = Result<String>>,
{
    let words: BTreeSet<Phrase> =
        phrases.iter().flat_map(|p| p.words().map(|w| Phrase::new(w).expect("word of a valid phrase"))).collect();
    let all: BTreeSet<Phrase> = phrases.union(&words).cloned().collect();
    let matcher = if all.is_empty() { None } else { Some(PatternSet::new(all)?) };
    let n = matcher.as_ref().map_or(0, |m| m.len());
    let mut totals = Counts::new(n);
    let mut batch = Vec::with_capacity(batch_size.max(1));
    let mut flush = |batch: &mut Vec<String>| {
        match &matcher {
            Some(m) => totals.add(&count_batch(m, batch)),
            None => totals.docs += batch.len() as u64,
        }
        batch.clear();
    };
    for p in paragraphs {
        batch.push(p?);
        if batch.len() >= batch_size.max(1) {
            flush(&mut batch);
        }
    }
    flush(&mut batch);

    if totals.docs == 0 {
        return Err(Error::EmptyCorpus);
    }
    let mut table = IdfTable { doc_count: totals.docs, ..IdfTable::default() };
    let Some(matcher) = matcher else {
        return Ok(table);
    };
    let docs = totals.docs as f64;
    for (id, pattern) in matcher.patterns().iter().enumerate() {
        let df = totals.df[id];
        if df == 0 {
            continue;
        }
        let idf = (docs / df as f64).ln();
        if phrases.contains(pattern) {
            table.scores.insert(pattern.clone(), idf);
            table.uppercase_share.insert(pattern.clone(), totals.uppercase[id] as f64 / totals.occurrences[id] as f64);
        }
        if words.contains(pattern) {
            table.word_scores.insert(pattern.as_str().to_string(), idf);
        }
    }
    Ok(table)
}

/// Writes the table as `D\tdoc_count`, then `P\tphrase\tidf\tuppercase_share`
/// and `W\tword\tidf` rows in sorted order.
pub fn write_idf(path: &Path, idf: &IdfTable) -> Result<()> {
    let mut w = create_writer(path)?;
    let mut out = format!("D\t{}\n", idf.doc_count);
    let mut phrases: Vec<_> = idf.scores.iter().collect();
    phrases.sort_by(|a, b| a.0.cmp(b.0));
    for (p, s) in phrases {
        let share = idf.uppercase_share.get(p).copied().unwrap_or(0.0);
        out.push_str(&format!("P\t{p}\t{s}\t{share}\n"));
    }
    let mut words: Vec<_> = idf.word_scores.iter().collect();
    words.sort_by(|a, b| a.0.cmp(b.0));
    for (word, s) in words {
        out.push_str(&format!("W\t{word}\t{s}\n"));
    }
    w.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_idf(path: &Path) -> Result<IdfTable> {
    let mut table = IdfTable::default();
    let mut seen_docs = false;
    for item in LineReader::open(path)? {
        let (line, text) = item?;
        let err = |m: &str| Error::Schema { path: path.to_path_buf(), line, message: m.to_string() };
        let f: Vec<&str> = text.split('\t').collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| err("bad number"));
        match (f.first().copied(), f.len()) {
            (Some("D"), 2) => {
                table.doc_count = f[1].parse().map_err(|_| err("bad document count"))?;
                seen_docs = true;
            }
            (Some("P"), 4) => {
                let p = Phrase::new(f[1]).map_err(|_| err("bad phrase"))?;
                table.scores.insert(p.clone(), num(f[2])?);
                table.uppercase_share.insert(p, num(f[3])?);
            }
            (Some("W"), 3) => {
                table.word_scores.insert(f[1].to_string(), num(f[2])?);
            }
            _ => return Err(err("unrecognized idf row")),
        }
    }
    if !seen_docs {
        return Err(Error::Schema { path: path.to_path_buf(), line: 0, message: "missing document count".into() });
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ps: &[&str]) -> BTreeSet<Phrase> {
        ps.iter().map(|p| Phrase::new(*p).unwrap()).collect()
    }

    fn corpus() -> Vec<String> {
        [
            "The Congo river flows west.",
            "Kinshasa lies on the congo.",
            "The Congolese franc.",
            "Bantu languages of the Congo basin.",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    }

    #[test]
    fn phrase_in_every_paragraph_scores_zero() {
        let idf = compute_idf(corpus(), &set(&["the"])).unwrap();
        assert_eq!(idf.phrase_idf("the"), 0.0);
    }

    #[test]
    fn phrase_in_one_of_four() {
        let idf = compute_idf(corpus(), &set(&["bantu"])).unwrap();
        assert!((idf.phrase_idf("bantu") - 4f64.ln()).abs() < 1e-12);
        assert!((idf.phrase_idf("bantu") - 1.3863).abs() < 1e-4);
    }

    #[test]
    fn word_boundaries_and_absent_phrases() {
        let idf = compute_idf(corpus(), &set(&["congo", "zaire river"])).unwrap();
        // "Congolese" does not count.
        assert_eq!(idf.phrase_idf("congo"), (4.0f64 / 3.0).ln());
        assert_eq!(idf.phrase_idf("zaire river"), f64::INFINITY);
        assert!(idf.word_scores.contains_key("river"));
        assert!(!idf.word_scores.contains_key("zaire"));
        assert!((idf.uppercase_share[&Phrase::new("congo").unwrap()] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_corpus() {
        assert!(matches!(compute_idf(Vec::<String>::new(), &set(&["a"])), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn file_round_trip() {
        let idf = compute_idf(corpus(), &set(&["congo", "the congo", "bantu"])).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("idf.tsv");
        write_idf(&p, &idf).unwrap();
        assert_eq!(read_idf(&p).unwrap(), idf);
    }
}
