//! Deliberately naive reference implementations, written without the
//! matcher, tables or dynamic programs of the core crate. Tests compare the
//! core against these.

use std::collections::{BTreeMap, BTreeSet, HashMap};

fn word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\''
}

fn lower(text: &str) -> Vec<char> {
    text.chars()
        .map(|c| {
            let l: Vec<char> = c.to_lowercase().collect();
            if l.len() == 1 {
                l[0]
            } else {
                c
            }
        })
        .collect()
}

/// Every `(start, end)` where `needle` occurs in lowercased `text` with no
/// word character directly before or after it. Offsets count characters.
pub fn boundary_matches(text: &str, needle: &str) -> Vec<(usize, usize)> {
    let hay = lower(text);
    let n: Vec<char> = needle.chars().collect();
    let mut out = Vec::new();
    if n.is_empty() || n.len() > hay.len() {
        return out;
    }
    for s in 0..=hay.len() - n.len() {
        let e = s + n.len();
        if hay[s..e] != n[..] {
            continue;
        }
        let left_ok = s == 0 || !word_char(hay[s - 1]);
        let right_ok = e == hay.len() || !word_char(hay[e]);
        if left_ok && right_ok {
            out.push((s, e));
        }
    }
    out
}

/// All occurrences of all patterns: `(start, end, pattern)` sorted by start,
/// then longest first, then pattern text.
pub fn occurrences(text: &str, patterns: &[String]) -> Vec<(usize, usize, String)> {
    let mut out: Vec<(usize, usize, String)> = patterns
        .iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .flat_map(|p| boundary_matches(text, p).into_iter().map(move |(s, e)| (s, e, p.clone())))
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));
    out
}

/// Document frequency of each term: the number of paragraphs holding at
/// least one boundary match.
pub fn document_frequencies(paragraphs: &[String], terms: &BTreeSet<String>) -> BTreeMap<String, u64> {
    terms
        .iter()
        .map(|t| {
            let df = paragraphs.iter().filter(|p| !boundary_matches(p, t).is_empty()).count() as u64;
            (t.clone(), df)
        })
        .collect()
}

/// `ln(N / df)` for each phrase and for each word of each phrase; terms
/// that never occur are left out.
pub fn idf(paragraphs: &[String], phrases: &BTreeSet<String>) -> (BTreeMap<String, f64>, BTreeMap<String, f64>) {
    let n = paragraphs.len() as f64;
    let words: BTreeSet<String> = phrases.iter().flat_map(|p| p.split(' ').map(str::to_string)).collect();
    let score = |df: BTreeMap<String, u64>| -> BTreeMap<String, f64> {
        df.into_iter().filter(|(_, d)| *d > 0).map(|(t, d)| (t, (n / d as f64).ln())).collect()
    };
    (score(document_frequencies(paragraphs, phrases)), score(document_frequencies(paragraphs, &words)))
}

/// Support of every `(ngram, phrase)` false-positive pair by scanning each
/// paragraph for each variant separately. `common(word)` decides whether a
/// word counts as common.
pub fn false_positive_support(
    pairs: &[(String, String)],
    paragraphs: &[String],
    common: impl Fn(&str) -> bool,
) -> BTreeMap<(String, String), u64> {
    let mut out = BTreeMap::new();
    for (orig, recog) in pairs {
        if orig == recog || !recog.split(' ').all(&common) {
            continue;
        }
        let support: u64 = paragraphs.iter().map(|p| boundary_matches(p, recog).len() as u64).sum();
        if support > 0 {
            out.insert((recog.clone(), orig.clone()), support);
        }
    }
    out
}

const STRIPPABLE: &[char] = &[',', '.', ';', ':', '!', '?'];

fn plain(c: char) -> bool {
    c.is_alphabetic() || "'.,;:!?\"()-".contains(c)
}

/// One way of covering a token run: either a dictionary replacement of
/// `len` tokens or one token copied as is.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Piece {
    len: usize,
    replaced: bool,
    text: String,
}

fn replacement(dict: &HashMap<String, String>, tokens: &[&str]) -> Option<String> {
    let joined = tokens.join(" ");
    if let Some(s) = dict.get(&joined) {
        return Some(s.clone());
    }
    let last = tokens[tokens.len() - 1];
    let core = last.trim_end_matches(STRIPPABLE);
    if core.is_empty() || core.len() == last.len() {
        return None;
    }
    let mut head: Vec<&str> = tokens[..tokens.len() - 1].to_vec();
    head.push(core);
    dict.get(&head.join(" ")).map(|s| format!("{s}{}", &last[core.len()..]))
}

fn segmentations(
    dict: &HashMap<String, String>,
    tokens: &[&str],
    at: usize,
    out: &mut Vec<Vec<Piece>>,
    cur: &mut Vec<Piece>,
) {
    if at == tokens.len() {
        out.push(cur.clone());
        return;
    }
    let mut any = false;
    for len in 1..=tokens.len() - at {
        if let Some(text) = replacement(dict, &tokens[at..at + len]) {
            any = true;
            cur.push(Piece { len, replaced: true, text });
            segmentations(dict, tokens, at + len, out, cur);
            cur.pop();
        }
    }
    if !any {
        cur.push(Piece { len: 1, replaced: false, text: tokens[at].to_string() });
        segmentations(dict, tokens, at + 1, out, cur);
        cur.pop();
    }
}

/// Normalizes by enumerating every segmentation of the whitespace tokens
/// into dictionary n-grams (or single unmatched tokens) and keeping the one
/// whose piece lengths are lexicographically largest, i.e. the
/// leftmost-longest one. Returns the text and the character spans of copied
/// tokens holding characters outside the plain alphabet.
pub fn normalize(dict: &HashMap<String, String>, text: &str) -> (String, Vec<(usize, usize)>) {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let mut all = Vec::new();
    segmentations(dict, &tokens, 0, &mut all, &mut Vec::new());
    let best = all
        .into_iter()
        .max_by(|a, b| {
            let ka: Vec<usize> = a.iter().map(|p| p.len).collect();
            let kb: Vec<usize> = b.iter().map(|p| p.len).collect();
            ka.cmp(&kb)
        })
        .unwrap_or_default();
    let mut out = String::new();
    let mut skips = Vec::new();
    for p in best {
        if !out.is_empty() {
            out.push(' ');
        }
        let start = out.chars().count();
        out.push_str(&p.text);
        if !p.replaced && !p.text.chars().all(plain) {
            skips.push((start, out.chars().count()));
        }
    }
    (out, skips)
}

/// Minimum edit count between two sequences, and among minimum alignments
/// the fewest substitutions, by plain recursion with memoization.
pub fn edit_counts<T: PartialEq>(r: &[T], h: &[T]) -> (u64, u64) {
    fn go<T: PartialEq>(
        r: &[T],
        h: &[T],
        i: usize,
        j: usize,
        memo: &mut HashMap<(usize, usize), (u64, u64)>,
    ) -> (u64, u64) {
        if i == r.len() {
            return ((h.len() - j) as u64, 0);
        }
        if j == h.len() {
            return ((r.len() - i) as u64, 0);
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let diag = {
            let (e, s) = go(r, h, i + 1, j + 1, memo);
            if r[i] == h[j] {
                (e, s)
            } else {
                (e + 1, s + 1)
            }
        };
        let del = {
            let (e, s) = go(r, h, i + 1, j, memo);
            (e + 1, s)
        };
        let ins = {
            let (e, s) = go(r, h, i, j + 1, memo);
            (e + 1, s)
        };
        let best = diag.min(del).min(ins);
        memo.insert((i, j), best);
        best
    }
    go(r, h, 0, 0, &mut HashMap::new())
}

/// `(substitutions, deletions, insertions)` of an optimal alignment, found
/// by enumerating every alignment path. Exponential; for inputs of up to
/// about 7 items.
pub fn enumerate_alignments<T: PartialEq>(r: &[T], h: &[T]) -> (u64, u64, u64) {
    fn go<T: PartialEq>(
        r: &[T],
        h: &[T],
        i: usize,
        j: usize,
        sdi: (u64, u64, u64),
        best: &mut Option<(u64, u64, u64)>,
    ) {
        if i == r.len() && j == h.len() {
            let key = |c: (u64, u64, u64)| (c.0 + c.1 + c.2, c.0);
            if best.is_none_or(|b| key(sdi) < key(b)) {
                *best = Some(sdi);
            }
            return;
        }
        if i < r.len() && j < h.len() {
            let s = u64::from(r[i] != h[j]);
            go(r, h, i + 1, j + 1, (sdi.0 + s, sdi.1, sdi.2), best);
        }
        if i < r.len() {
            go(r, h, i + 1, j, (sdi.0, sdi.1 + 1, sdi.2), best);
        }
        if j < h.len() {
            go(r, h, i, j + 1, (sdi.0, sdi.1, sdi.2 + 1), best);
        }
    }
    let mut best = None;
    go(r, h, 0, 0, (0, 0, 0), &mut best);
    best.expect("at least one path")
}

/// Splits an oracle `(edits, substitutions)` result into substitutions,
/// deletions and insertions, which it determines uniquely.
pub fn split_counts(edits: u64, subs: u64, ref_len: usize, hyp_len: usize) -> (u64, u64, u64) {
    let gaps = edits - subs;
    let diff = ref_len as i64 - hyp_len as i64;
    let del = (gaps as i64 + diff) / 2;
    (subs, del as u64, (gaps as i64 - del) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_rules() {
        assert_eq!(boundary_matches("Walnuts and nuts and", "nuts and"), vec![(12, 20)]);
        assert_eq!(boundary_matches("O'Brien's", "brien's"), vec![]);
        assert_eq!(boundary_matches("the Congo.", "congo"), vec![(4, 9)]);
    }

    #[test]
    fn recursion_and_enumeration_agree() {
        let r: Vec<char> = "kitten".chars().collect();
        let h: Vec<char> = "sitting".chars().collect();
        let (e, s) = edit_counts(&r, &h);
        assert_eq!((e, s), (3, 2));
        assert_eq!(split_counts(e, s, r.len(), h.len()), enumerate_alignments(&r, &h));
    }

    #[test]
    fn leftmost_longest_beats_more_replacements() {
        let dict: HashMap<String, String> =
            [("a b", "x"), ("b c", "y"), ("c", "z")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        assert_eq!(normalize(&dict, "a b c").0, "x z");
    }
}
