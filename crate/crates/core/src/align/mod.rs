//! Character-level statistical alignment of reference and recognized
//! phrases.
//!
//! Characters, spaces included, play the role of words in a lexical
//! translation model: every recognized character is generated by one
//! reference character or by a NULL source, and translation probabilities
//! are estimated by expectation maximization from a uniform start.

mod subphrase;
mod viterbi;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;

pub use subphrase::{extract_subphrases, ExpansionParams};
pub use viterbi::{viterbi_align, CharAlignment, Decoding};

use crate::corpus::tsv::{create_writer, LineReader};
use crate::corpus::CorruptionPair;
use crate::error::{Error, Result};

/// Probability assigned to character pairs outside the trained vocabulary.
pub const FLOOR_PROB: f64 = 1e-10;

/// Pairs per E-step accumulator. Fixed so that the summation order, and
/// therefore the trained table, does not depend on the thread count.
const CHUNK_SIZE: usize = 1024;
const CHUNKS_PER_ROUND: usize = 64;

/// `t(target | source)` for every source character (plus NULL, row 0) and
/// every target character seen in training.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationTable {
    sources: Vec<char>,
    targets: Vec<char>,
    source_index: HashMap<char, usize>,
    target_index: HashMap<char, usize>,
    probs: Vec<f64>,
}

impl TranslationTable {
    /// `sources` excludes NULL; both lists are sorted and deduplicated.
    fn uniform(mut sources: Vec<char>, mut targets: Vec<char>) -> Self {
        sources.sort_unstable();
        sources.dedup();
        targets.sort_unstable();
        targets.dedup();
        let rows = sources.len() + 1;
        let p = 1.0 / targets.len() as f64;
        let source_index = sources.iter().enumerate().map(|(i, &c)| (c, i + 1)).collect();
        let target_index = targets.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        TranslationTable { probs: vec![p; rows * targets.len()], sources, targets, source_index, target_index }
    }

    /// Source characters, not including NULL.
    pub fn source_chars(&self) -> &[char] {
        &self.sources
    }

    pub fn target_chars(&self) -> &[char] {
        &self.targets
    }

    fn width(&self) -> usize {
        self.targets.len()
    }

    fn row_of(&self, source: Option<char>) -> Option<usize> {
        match source {
            None => Some(0),
            Some(c) => self.source_index.get(&c).copied(),
        }
    }

    /// `t(target | source)`, where `None` is the NULL source. Pairs outside
    /// the vocabulary, or with zero trained mass, get [`FLOOR_PROB`].
    pub fn prob(&self, source: Option<char>, target: char) -> f64 {
        match (self.row_of(source), self.target_index.get(&target)) {
            (Some(r), Some(&t)) => self.probs[r * self.width() + t].max(FLOOR_PROB),
            _ => FLOOR_PROB,
        }
    }

    /// Raw trained probability, zero outside the vocabulary.
    pub fn raw_prob(&self, source: Option<char>, target: char) -> f64 {
        match (self.row_of(source), self.target_index.get(&target)) {
            (Some(r), Some(&t)) => self.probs[r * self.width() + t],
            _ => 0.0,
        }
    }

    pub fn row_sum(&self, source: Option<char>) -> Option<f64> {
        let r = self.row_of(source)?;
        Some(self.probs[r * self.width()..(r + 1) * self.width()].iter().sum())
    }

    /// Iterates `(source, target, prob)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (Option<char>, char, f64)> + '_ {
        let w = self.width();
        self.probs.iter().enumerate().map(move |(k, &p)| {
            let (r, t) = (k / w, k % w);
            let src = if r == 0 { None } else { Some(self.sources[r - 1]) };
            (src, self.targets[t], p)
        })
    }

    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let mut w = create_writer(path)?;
        let mut line = String::new();
        for (s, t, p) in self.entries() {
            line.clear();
            let _ = writeln!(line, "{}\t{}\t{}", escape(s), escape(Some(t)), p);
            w.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_tsv(path: &Path) -> Result<Self> {
        let mut rows: Vec<(Option<char>, char, f64)> = Vec::new();
        let lines = LineReader::open(path)?;
        for item in lines {
            let (line_no, line) = item?;
            let schema = |message: String| Error::Schema { path: path.to_path_buf(), line: line_no, message };
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 {
                return Err(schema(format!("expected 3 columns, found {}", f.len())));
            }
            let s = unescape(f[0]).ok_or_else(|| schema(format!("bad source {:?}", f[0])))?;
            let t = unescape(f[1]).flatten().ok_or_else(|| schema(format!("bad target {:?}", f[1])))?;
            let p: f64 = f[2].parse().map_err(|_| schema(format!("bad probability {:?}", f[2])))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(schema(format!("probability {p} outside [0,1]")));
            }
            rows.push((s, t, p));
        }
        let sources: Vec<char> = rows.iter().filter_map(|r| r.0).collect();
        let targets: Vec<char> = rows.iter().map(|r| r.1).collect();
        let mut table = TranslationTable::uniform(sources, targets);
        let w = table.width();
        let mut seen = vec![false; table.probs.len()];
        for (s, t, p) in rows {
            let r = table.row_of(s).expect("row registered");
            let k = r * w + table.target_index[&t];
            if std::mem::replace(&mut seen[k], true) {
                return Err(Error::InvalidRecord(format!("duplicate entry {:?} -> {t:?}", s)));
            }
            table.probs[k] = p;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidRecord("translation table is not a full matrix".into()));
        }
        Ok(table)
    }
}

fn escape(c: Option<char>) -> String {
    match c {
        None => "\\0".into(),
        Some(' ') => "\\s".into(),
        Some('\\') => "\\\\".into(),
        Some(c) => c.to_string(),
    }
}

/// `Some(None)` is the NULL token.
fn unescape(s: &str) -> Option<Option<char>> {
    match s {
        "\\0" => Some(None),
        "\\s" => Some(Some(' ')),
        "\\\\" => Some(Some('\\')),
        _ => {
            let mut it = s.chars();
            match (it.next(), it.next()) {
                (Some(c), None) if c != '\\' => Some(Some(c)),
                _ => None,
            }
        }
    }
}

/// Default diagonal tension of the alignment prior.
pub const DEFAULT_TENSION: f64 = 4.0;

/// Writes the alignment prior for recognized position `j` of `m` into
/// `out`: `out[0]` is NULL, `out[1 + i]` is reference position `i` of `l`.
pub fn alignment_prior(l: usize, m: usize, j: usize, tension: f64, out: &mut Vec<f64>) {
    out.clear();
    let null = 1.0 / (l as f64 + 1.0);
    out.push(null);
    let pj = (j as f64 + 0.5) / m as f64;
    let mut z = 0.0;
    for i in 0..l {
        let w = (-tension * ((i as f64 + 0.5) / l as f64 - pj).abs()).exp();
        z += w;
        out.push(w);
    }
    let scale = (1.0 - null) / z;
    for w in &mut out[1..] {
        *w *= scale;
    }
}

/// A trained translation table with the prior it was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignModel {
    pub table: TranslationTable,
    pub tension: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignParams {
    pub iterations: usize,
    pub tension: f64,
}

impl Default for AlignParams {
    fn default() -> Self {
        AlignParams { iterations: 10, tension: DEFAULT_TENSION }
    }
}

/// Result of EM training.
#[derive(Debug, Clone)]
pub struct TrainedAlignment {
    pub model: AlignModel,
    /// Corpus log-likelihood under the initial table and after each
    /// iteration: `iterations + 1` values.
    pub log_likelihoods: Vec<f64>,
}

/// Pair encoded as row indices (NULL first) and target column indices.
struct Encoded {
    rows: Vec<usize>,
    cols: Vec<usize>,
    weight: f64,
}

/// Trains with the default tension for `iterations` rounds.
pub fn train_alignment(pairs: &[CorruptionPair], iterations: usize) -> Result<TrainedAlignment> {
    train_alignment_with(pairs, &AlignParams { iterations, ..AlignParams::default() })
}

/// Trains translation probabilities with EM. Each pair is weighted by its
/// count.
pub fn train_alignment_with(pairs: &[CorruptionPair], params: &AlignParams) -> Result<TrainedAlignment> {
    if params.iterations == 0 {
        return Err(Error::InvalidParams("iterations must be at least 1".into()));
    }
    if !(params.tension >= 0.0 && params.tension.is_finite()) {
        return Err(Error::InvalidParams(format!("tension {} must be finite and non-negative", params.tension)));
    }
    if pairs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let sources: Vec<char> = pairs.iter().flat_map(|p| p.orig.as_str().chars()).collect();
    let targets: Vec<char> = pairs.iter().flat_map(|p| p.recog.as_str().chars()).collect();
    let mut table = TranslationTable::uniform(sources, targets);
    let encoded: Vec<Encoded> = pairs
        .iter()
        .map(|p| {
            let mut rows = vec![0];
            rows.extend(p.orig.as_str().chars().map(|c| table.source_index[&c]));
            Encoded {
                rows,
                cols: p.recog.as_str().chars().map(|c| table.target_index[&c]).collect(),
                weight: p.count as f64,
            }
        })
        .collect();

    let tension = params.tension;
    let mut log_likelihoods = Vec::with_capacity(params.iterations + 1);
    for _ in 0..params.iterations {
        let (counts, ll) = expectation(&table, &encoded, tension);
        log_likelihoods.push(ll);
        maximize(&mut table, &counts);
    }
    log_likelihoods.push(log_likelihood(&table, &encoded, tension));
    Ok(TrainedAlignment { model: AlignModel { table, tension }, log_likelihoods })
}

fn chunk_expectation(table: &TranslationTable, chunk: &[Encoded], tension: f64) -> (Vec<f64>, f64) {
    let w = table.width();
    let mut counts = vec![0.0; table.probs.len()];
    let mut ll = 0.0;
    let mut prior = Vec::new();
    let mut post = Vec::new();
    for pair in chunk {
        let (l, m) = (pair.rows.len() - 1, pair.cols.len());
        for (j, &col) in pair.cols.iter().enumerate() {
            alignment_prior(l, m, j, tension, &mut prior);
            post.clear();
            post.extend(pair.rows.iter().zip(&prior).map(|(&r, &a)| a * table.probs[r * w + col]));
            let denom: f64 = post.iter().sum();
            ll += pair.weight * denom.ln();
            for (&r, &p) in pair.rows.iter().zip(&post) {
                counts[r * w + col] += pair.weight * p / denom;
            }
        }
    }
    (counts, ll)
}

fn for_each_chunk_in_order(
    table: &TranslationTable,
    encoded: &[Encoded],
    tension: f64,
    mut merge: impl FnMut(Vec<f64>, f64),
) {
    for round in encoded.chunks(CHUNK_SIZE * CHUNKS_PER_ROUND) {
        let partial: Vec<(Vec<f64>, f64)> =
            round.par_chunks(CHUNK_SIZE).map(|chunk| chunk_expectation(table, chunk, tension)).collect();
        for (c, ll) in partial {
            merge(c, ll);
        }
    }
}

fn expectation(table: &TranslationTable, encoded: &[Encoded], tension: f64) -> (Vec<f64>, f64) {
    let mut total = vec![0.0; table.probs.len()];
    let mut ll = 0.0;
    for_each_chunk_in_order(table, encoded, tension, |c, l| {
        for (t, v) in total.iter_mut().zip(c) {
            *t += v;
        }
        ll += l;
    });
    (total, ll)
}

fn log_likelihood(table: &TranslationTable, encoded: &[Encoded], tension: f64) -> f64 {
    let mut ll = 0.0;
    for_each_chunk_in_order(table, encoded, tension, |_, l| ll += l);
    ll
}

fn maximize(table: &mut TranslationTable, counts: &[f64]) {
    let w = table.width();
    for (row, c) in table.probs.chunks_mut(w).zip(counts.chunks(w)) {
        let total: f64 = c.iter().sum();
        if total > 0.0 {
            for (p, &v) in row.iter_mut().zip(c) {
                *p = v / total;
            }
        }
    }
}
