//! Headerless TSV tables: `\t` between fields, `\n` after every record.
//!
//! Column layouts:
//!
//! | table            | columns                                                        |
//! |------------------|----------------------------------------------------------------|
//! | keys2corruptions | orig, recog, count, source_id                                  |
//! | keys2paragraph   | paragraph_id, `;`-joined keys, text                            |
//! | keys2related     | key, related, similarity                                       |
//! | falsepositives   | ngram, phrase, support                                         |
//! | examples         | original, corrupted, substitutions, char_tags, k candidates    |
//!
//! In `examples`, substitutions are `;`-separated entries of
//! `orig_start,orig_end,corr_start,corr_end,orig,corrupted`; char tags are
//! run-length encoded as `tag:run` pairs joined by `,`; each candidate is
//! `label:phrase` with label one of `pos`, `rnd`, `rel`, `fp`.
//!
//! Files ending in `.gz` are transparently (de)compressed.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::marker::PhantomData;
use std::path::{Path, PathBuf};

use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use super::{
    Candidate, CandidateLabel, CorruptionPair, FalsePositivePair, ParagraphRecord, RelatedPair, SourceId, Substitution,
    TrainingExample,
};
use crate::error::{Error, Result};
use crate::phrase::{Phrase, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableKind {
    Keys2Paragraph,
    Keys2Corruptions,
    Keys2Related,
    FalsePositives,
    Examples,
}

impl TableKind {
    pub fn name(self) -> &'static str {
        match self {
            TableKind::Keys2Paragraph => "keys2paragraph",
            TableKind::Keys2Corruptions => "keys2corruptions",
            TableKind::Keys2Related => "keys2related",
            TableKind::FalsePositives => "falsepositives",
            TableKind::Examples => "examples",
        }
    }
}

/// A record type with a fixed TSV layout.
pub trait TsvRecord: Sized {
    const KIND: TableKind;

    fn parse_fields(fields: &[&str]) -> std::result::Result<Self, String>;

    /// Appends the record's fields, tab-separated, without the newline.
    fn write_fields(&self, out: &mut String);
}

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

pub fn open_reader(path: &Path) -> Result<Box<dyn BufRead + Send>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(if is_gz(path) { Box::new(BufReader::new(MultiGzDecoder::new(file))) } else { Box::new(BufReader::new(file)) })
}

pub fn create_writer(path: &Path) -> Result<Box<dyn Write + Send>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(if is_gz(path) {
        Box::new(BufWriter::new(GzEncoder::new(file, Compression::default())))
    } else {
        Box::new(BufWriter::new(file))
    })
}

/// Streams lines as UTF-8 strings with their 1-based line number; the
/// trailing `\n` (and a preceding `\r`) is stripped.
pub struct LineReader {
    inner: Box<dyn BufRead + Send>,
    path: PathBuf,
    line: usize,
    buf: Vec<u8>,
}

impl LineReader {
    pub fn open(path: &Path) -> Result<Self> {
        Ok(LineReader { inner: open_reader(path)?, path: path.to_path_buf(), line: 0, buf: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn schema_error(&self, message: impl Into<String>) -> Error {
        Error::Schema { path: self.path.clone(), line: self.line, message: message.into() }
    }
}

impl Iterator for LineReader {
    type Item = Result<(usize, String)>;

    fn next(&mut self) -> Option<Self::Item> {
        self.buf.clear();
        match self.inner.read_until(b'\n', &mut self.buf) {
            Ok(0) => None,
            Ok(_) => {
                self.line += 1;
                if self.buf.last() == Some(&b'\n') {
                    self.buf.pop();
                    if self.buf.last() == Some(&b'\r') {
                        self.buf.pop();
                    }
                }
                match String::from_utf8(std::mem::take(&mut self.buf)) {
                    Ok(s) => Some(Ok((self.line, s))),
                    Err(_) => Some(Err(self.schema_error("invalid UTF-8"))),
                }
            }
            Err(e) => Some(Err(Error::io(&self.path, e))),
        }
    }
}

/// Iterator over the records of one table file, in file order.
pub struct TableReader<T> {
    lines: LineReader,
    _marker: PhantomData<T>,
}

impl<T: TsvRecord> Iterator for TableReader<T> {
    type Item = Result<T>;

    fn next(&mut self) -> Option<Self::Item> {
        let (_, line) = match self.lines.next()? {
            Ok(l) => l,
            Err(e) => return Some(Err(e)),
        };
        let fields: Vec<&str> = line.split('\t').collect();
        Some(T::parse_fields(&fields).map_err(|m| self.lines.schema_error(format!("{}: {m}", T::KIND.name()))))
    }
}

pub fn read_table<T: TsvRecord>(path: impl AsRef<Path>) -> Result<TableReader<T>> {
    Ok(TableReader { lines: LineReader::open(path.as_ref())?, _marker: PhantomData })
}

/// Reads a whole table into memory.
pub fn read_all<T: TsvRecord>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    read_table(path)?.collect()
}

/// Writes records in order. Returns the number written.
pub fn write_table<'a, T, I>(path: impl AsRef<Path>, records: I) -> Result<u64>
where
    T: TsvRecord + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let path = path.as_ref();
    let mut w = create_writer(path)?;
    let n = write_records(&mut w, records).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(n)
}

pub fn write_records<'a, T, I, W>(w: &mut W, records: I) -> io::Result<u64>
where
    T: TsvRecord + 'a,
    I: IntoIterator<Item = &'a T>,
    W: Write + ?Sized,
{
    let mut line = String::new();
    let mut n = 0;
    for r in records {
        line.clear();
        r.write_fields(&mut line);
        line.push('\n');
        w.write_all(line.as_bytes())?;
        n += 1;
    }
    Ok(n)
}

/// Serializes records to an in-memory string.
pub fn to_tsv_string<'a, T: TsvRecord + 'a>(records: impl IntoIterator<Item = &'a T>) -> String {
    let mut out = String::new();
    for r in records {
        r.write_fields(&mut out);
        out.push('\n');
    }
    out
}

/// Parses records from an in-memory string.
pub fn from_tsv_str<T: TsvRecord>(text: &str) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split('\t').collect();
            T::parse_fields(&fields).map_err(|message| Error::Schema {
                path: PathBuf::from("<memory>"),
                line: i + 1,
                message,
            })
        })
        .collect()
}

fn expect_columns(fields: &[&str], n: usize) -> std::result::Result<(), String> {
    if fields.len() == n {
        Ok(())
    } else {
        Err(format!("expected {n} columns, found {}", fields.len()))
    }
}

fn phrase(s: &str) -> std::result::Result<Phrase, String> {
    Phrase::new(s).map_err(|e| e.to_string())
}

fn number<T: std::str::FromStr>(s: &str, what: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|_| format!("invalid {what} {s:?}"))
}

impl TsvRecord for CorruptionPair {
    const KIND: TableKind = TableKind::Keys2Corruptions;

    fn parse_fields(fields: &[&str]) -> std::result::Result<Self, String> {
        expect_columns(fields, 4)?;
        let source = SourceId::new(fields[3]).map_err(|e| e.to_string())?;
        CorruptionPair::new(phrase(fields[0])?, phrase(fields[1])?, number(fields[2], "count")?, source)
            .map_err(|e| e.to_string())
    }

    fn write_fields(&self, out: &mut String) {
        use std::fmt::Write;
        let _ = write!(out, "{}\t{}\t{}\t{}", self.orig, self.recog, self.count, self.source);
    }
}

impl TsvRecord for ParagraphRecord {
    const KIND: TableKind = TableKind::Keys2Paragraph;

    fn parse_fields(fields: &[&str]) -> std::result::Result<Self, String> {
        expect_columns(fields, 3)?;
        let id = number(fields[0], "paragraph id")?;
        let keys = fields[1].split(';').map(phrase).collect::<std::result::Result<Vec<_>, _>>()?;
        let rec = ParagraphRecord::from_keys(id, fields[2].to_string(), &keys);
        let found = rec.keys().len();
        if found != keys.len() {
            return Err(format!("{} keys listed but {found} occur in the paragraph", keys.len()));
        }
        Ok(rec)
    }

    fn write_fields(&self, out: &mut String) {
        use std::fmt::Write;
        let _ = write!(out, "{}\t", self.id);
        for (i, k) in self.keys().into_iter().enumerate() {
            if i > 0 {
                out.push(';');
            }
            out.push_str(k.as_str());
        }
        out.push('\t');
        out.push_str(&self.text);
    }
}

impl TsvRecord for RelatedPair {
    const KIND: TableKind = TableKind::Keys2Related;

    fn parse_fields(fields: &[&str]) -> std::result::Result<Self, String> {
        expect_columns(fields, 3)?;
        let similarity: f64 = number(fields[2], "similarity")?;
        if !(similarity > 0.0 && similarity < 1.0) {
            return Err(format!("similarity {similarity} outside (0,1)"));
        }
        let pair = RelatedPair { key: phrase(fields[0])?, related: phrase(fields[1])?, similarity };
        if pair.key == pair.related {
            return Err("key equals related phrase".into());
        }
        Ok(pair)
    }

    fn write_fields(&self, out: &mut String) {
        use std::fmt::Write;
        let _ = write!(out, "{}\t{}\t{}", self.key, self.related, self.similarity);
    }
}

impl TsvRecord for FalsePositivePair {
    const KIND: TableKind = TableKind::FalsePositives;

    fn parse_fields(fields: &[&str]) -> std::result::Result<Self, String> {
        expect_columns(fields, 3)?;
        let pair = FalsePositivePair {
            ngram: phrase(fields[0])?,
            phrase: phrase(fields[1])?,
            support: number(fields[2], "support")?,
        };
        if pair.ngram == pair.phrase {
            return Err("ngram equals phrase".into());
        }
        if pair.support == 0 {
            return Err("zero support".into());
        }
        Ok(pair)
    }

    fn write_fields(&self, out: &mut String) {
        use std::fmt::Write;
        let _ = write!(out, "{}\t{}\t{}", self.ngram, self.phrase, self.support);
    }
}

/// Run-length encodes character tags as `tag:run` pairs.
pub fn encode_tags(tags: &[u8]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < tags.len() {
        let t = tags[i];
        let mut j = i;
        while j < tags.len() && tags[j] == t {
            j += 1;
        }
        if !out.is_empty() {
            out.push(',');
        }
        out.push_str(&format!("{t}:{}", j - i));
        i = j;
    }
    out
}

pub fn decode_tags(s: &str) -> std::result::Result<Vec<u8>, String> {
    let mut out = Vec::new();
    if s.is_empty() {
        return Ok(out);
    }
    for run in s.split(',') {
        let (tag, len) = run.split_once(':').ok_or_else(|| format!("bad tag run {run:?}"))?;
        let tag: u8 = number(tag, "tag")?;
        let len: usize = number(len, "run length")?;
        if len == 0 {
            return Err("zero-length tag run".into());
        }
        out.extend(std::iter::repeat_n(tag, len));
    }
    Ok(out)
}

fn parse_substitution(entry: &str) -> std::result::Result<Substitution, String> {
    let parts: Vec<&str> = entry.split(',').collect();
    if parts.len() != 6 {
        return Err(format!("bad substitution {entry:?}"));
    }
    let n = |s: &str| number::<usize>(s, "offset");
    let (os, oe, cs, ce) = (n(parts[0])?, n(parts[1])?, n(parts[2])?, n(parts[3])?);
    if os > oe || cs > ce {
        return Err(format!("inverted span in {entry:?}"));
    }
    Ok(Substitution {
        orig_span: Span::new(os, oe),
        corrupted_span: Span::new(cs, ce),
        orig: phrase(parts[4])?,
        corrupted: phrase(parts[5])?,
    })
}

impl TsvRecord for TrainingExample {
    const KIND: TableKind = TableKind::Examples;

    fn parse_fields(fields: &[&str]) -> std::result::Result<Self, String> {
        if fields.len() < 5 {
            return Err(format!("expected at least 5 columns, found {}", fields.len()));
        }
        let substitutions = if fields[2].is_empty() {
            Vec::new()
        } else {
            fields[2].split(';').map(parse_substitution).collect::<std::result::Result<_, _>>()?
        };
        let candidates = fields[4..]
            .iter()
            .map(|c| {
                let (label, p) = c.split_once(':').ok_or_else(|| format!("bad candidate {c:?}"))?;
                let label = CandidateLabel::from_tag(label).ok_or_else(|| format!("unknown label {label:?}"))?;
                Ok(Candidate { phrase: phrase(p)?, label })
            })
            .collect::<std::result::Result<_, String>>()?;
        let ex = TrainingExample {
            original_snippet: fields[0].to_string(),
            corrupted_snippet: fields[1].to_string(),
            substitutions,
            candidates,
            char_tags: decode_tags(fields[3])?,
        };
        ex.validate().map_err(|e| e.to_string())?;
        Ok(ex)
    }

    fn write_fields(&self, out: &mut String) {
        use std::fmt::Write;
        out.push_str(&self.original_snippet);
        out.push('\t');
        out.push_str(&self.corrupted_snippet);
        out.push('\t');
        for (i, s) in self.substitutions.iter().enumerate() {
            if i > 0 {
                out.push(';');
            }
            let _ = write!(
                out,
                "{},{},{},{},{},{}",
                s.orig_span.start, s.orig_span.end, s.corrupted_span.start, s.corrupted_span.end, s.orig, s.corrupted
            );
        }
        out.push('\t');
        out.push_str(&encode_tags(&self.char_tags));
        for c in &self.candidates {
            let _ = write!(out, "\t{}:{}", c.label.tag(), c.phrase);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(o: &str, r: &str, n: u64, s: &str) -> CorruptionPair {
        CorruptionPair::new(Phrase::new(o).unwrap(), Phrase::new(r).unwrap(), n, SourceId::new(s).unwrap()).unwrap()
    }

    #[test]
    fn corruption_pair_line() {
        let rows: Vec<CorruptionPair> = from_tsv_str("congo\tcondo\t9\tasr_a").unwrap();
        assert_eq!(rows, vec![pair("congo", "condo", 9, "asr_a")]);
        let line = to_tsv_string(&[pair("bantu", "band to", 10, "asr_a")]);
        assert_eq!(line, "bantu\tband to\t10\tasr_a\n");
    }

    #[test]
    fn schema_errors_carry_line_numbers() {
        let err = from_tsv_str::<CorruptionPair>("congo\tcondo\t9\tasr_a\ncongo\tcondo\t9").unwrap_err();
        match err {
            Error::Schema { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(from_tsv_str::<CorruptionPair>("congo\tcondo\t0\tasr_a").is_err());
        assert!(from_tsv_str::<CorruptionPair>("Congo\tcondo\t1\tasr_a").is_err());
        assert!(from_tsv_str::<RelatedPair>("a\ta\t0.5").is_err());
        assert!(from_tsv_str::<RelatedPair>("a\tb\t1.5").is_err());
        assert!(from_tsv_str::<FalsePositivePair>("a\tb\t0").is_err());
    }

    #[test]
    fn empty_file_reads_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("empty.tsv");
        std::fs::write(&p, "").unwrap();
        assert!(read_all::<CorruptionPair>(&p).unwrap().is_empty());
        let out = dir.path().join("out.tsv");
        write_table::<CorruptionPair, _>(&out, &[]).unwrap();
        assert_eq!(std::fs::read(&out).unwrap(), b"");
    }

    #[test]
    fn invalid_utf8_is_a_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.tsv");
        std::fs::write(&p, b"congo\tcondo\t9\tasr_a\n\xff\xfe\tx\t1\ta\n").unwrap();
        let rows: Vec<_> = read_table::<CorruptionPair>(&p).unwrap().collect();
        assert!(rows[0].is_ok());
        assert!(matches!(rows[1], Err(Error::Schema { line: 2, .. })));
    }

    #[test]
    fn gzip_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.tsv.gz");
        let rows = vec![pair("congo", "kongo", 1, "asr_b"), pair("bantu", "ban to", 7, "asr_a")];
        write_table(&p, &rows).unwrap();
        assert_eq!(read_all::<CorruptionPair>(&p).unwrap(), rows);
    }

    #[test]
    fn paragraph_keys_recover_spans() {
        let rec = ParagraphRecord::from_keys(
            7,
            "Mbesa is a Bantu language of the Democratic Republic of the Congo.".into(),
            &[
                Phrase::new("congo").unwrap(),
                Phrase::new("bantu").unwrap(),
                Phrase::new("republic of the congo").unwrap(),
                Phrase::new("mbesa").unwrap(),
            ],
        );
        let line = to_tsv_string(std::slice::from_ref(&rec));
        assert!(line.starts_with("7\tmbesa;bantu;republic of the congo;congo\tMbesa"));
        let back: Vec<ParagraphRecord> = from_tsv_str(&line).unwrap();
        assert_eq!(back, vec![rec]);
        assert!(from_tsv_str::<ParagraphRecord>("1\tzaire\tThe Congo").is_err());
    }

    #[test]
    fn tag_runs() {
        let tags = [0, 0, 3, 3, 3, 0, 1];
        assert_eq!(encode_tags(&tags), "0:2,3:3,0:1,1:1");
        assert_eq!(decode_tags("0:2,3:3,0:1,1:1").unwrap(), tags);
        assert_eq!(encode_tags(&[]), "");
        assert!(decode_tags("0:0").is_err());
    }
}
