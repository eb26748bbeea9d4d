//! Deterministic synthetic data: the bundled toy corpus and benchmark
//! fixtures.
//!
//! Reference phrases are invented names built from syllables, plus a few
//! fixed ones. Their recognized variants imitate recognizer mistakes:
//! vowel and consonant confusions, word splits, dropped letters and
//! common-word lookalikes. Paragraphs mix common words, names, numbers and
//! abbreviations covered by the normalization dictionary.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use biasgen_core::{CorruptionPair, Phrase, SourceId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod oracle;

pub const COMMON_WORDS: &[&str] = &[
    "the", "of", "and", "in", "to", "a", "is", "was", "for", "on", "as", "with", "by", "at", "from", "his", "her",
    "it", "an", "are", "were", "which", "this", "that", "be", "or", "has", "had", "its", "first", "also", "after",
    "new", "one", "two", "their", "been", "other", "they", "who", "into", "more", "time", "during", "most", "some",
    "people", "later", "near", "city", "river", "north", "south", "west", "east", "known", "part", "where", "many",
    "built", "born", "called", "found", "made", "used", "became", "named", "school", "church", "family", "house",
    "war", "world", "state", "area", "island", "county", "village", "town", "language", "music", "album", "film",
    "book", "team", "game", "season", "record", "band", "song", "park", "road", "bank", "building", "club", "party",
    "long", "small", "large", "old", "early", "late", "local", "main", "high", "great", "little", "dark", "light",
    "nuts", "honey", "soaked", "chopped", "bread", "water", "green", "stone", "hill", "lake", "bay", "port", "low",
    "crash", "than", "too", "come", "go", "over", "under", "between", "against", "around", "about", "because", "while",
    "when", "there", "these", "those", "such", "only", "both", "each", "all", "any", "between", "along",
];

const ONSETS: &[&str] = &[
    "b", "c", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "ch", "dr", "gr", "kr", "mb",
    "nd", "ph", "sh", "st", "th", "tr",
];
const NUCLEI: &[&str] = &["a", "e", "i", "o", "u", "ia", "ou", "ae", "ei", "y"];
const CODAS: &[&str] = &["", "", "", "n", "r", "s", "l", "m", "th", "ck", "nt", "rd", "sk"];

/// Fixed reference phrases with hand-picked variants and counts.
const FIXED: &[(&str, &[(&str, u64)])] = &[
    (
        "congo",
        &[
            ("congo", 133),
            ("condo", 9),
            ("connt go", 1),
            ("go", 1),
            ("kango", 1),
            ("come go", 1),
            ("calgo", 1),
            ("kongo", 1),
        ],
    ),
    (
        "bantu",
        &[
            ("band to", 10),
            ("bantu", 9),
            ("ban to", 7),
            ("bant to", 6),
            ("banta", 2),
            ("than too", 1),
            ("than to", 1),
            ("bad to", 1),
        ],
    ),
    ("republic of the congo", &[("republic of the condo", 3), ("republic of the congo", 20)]),
    ("mbesa", &[("embassa", 4), ("mbesa", 2), ("the saw", 1)]),
    ("knutsen", &[("nuts and", 5), ("knutson", 3), ("knutsen", 2)]),
    ("lovecraftian", &[("low crash and", 2), ("lovecraft in", 3), ("lovecraftian", 4)]),
    ("lovecraft", &[("love craft", 6), ("lovecraft", 5)]),
    ("discworld noir", &[("discorled nowhere", 2), ("disc world noir", 4)]),
    ("nathalie", &[("natalie", 5), ("nathalie", 3)]),
    ("nataly", &[("natalie", 4), ("nataly", 2)]),
    ("eufaula", &[("you fall a", 3), ("eufaula", 1)]),
];

fn syllable(rng: &mut impl Rng) -> String {
    let mut s = String::new();
    s.push_str(ONSETS.choose(rng).unwrap());
    s.push_str(NUCLEI.choose(rng).unwrap());
    s.push_str(CODAS.choose(rng).unwrap());
    s
}

fn name_word(rng: &mut impl Rng) -> String {
    let n = if rng.gen_bool(0.7) { 2 } else { 3 };
    (0..n).map(|_| syllable(rng)).collect()
}

/// A misrecognition of `phrase`.
fn corrupt(phrase: &str, rng: &mut impl Rng) -> String {
    let mut chars: Vec<char> = phrase.chars().collect();
    let edits = rng.gen_range(1..=3);
    for _ in 0..edits {
        let letters: Vec<usize> = (0..chars.len()).filter(|&i| chars[i] != ' ').collect();
        let i = *letters.choose(rng).unwrap();
        match rng.gen_range(0..6) {
            0 => chars[i] = *['a', 'e', 'i', 'o', 'u'].choose(rng).unwrap(),
            1 => {
                let swap = match chars[i] {
                    'k' => 'c',
                    'c' => 'k',
                    's' => 'z',
                    'z' => 's',
                    'b' => 'p',
                    'p' => 'b',
                    'd' => 't',
                    't' => 'd',
                    'v' => 'f',
                    'f' => 'v',
                    c => c,
                };
                chars[i] = swap;
            }
            2 if chars.len() > 3 => {
                chars.remove(i);
            }
            3 if i > 1 && i + 2 < chars.len() && chars[i - 1] != ' ' && chars[i + 1] != ' ' => chars.insert(i, ' '),
            4 => {
                let c = chars[i];
                chars.insert(i, c);
            }
            _ => chars[i] = *['n', 'm', 'r', 'l'].choose(rng).unwrap(),
        }
    }
    chars.into_iter().collect()
}

/// A phrase of common words that could be heard in place of `phrase`.
fn lookalike(rng: &mut impl Rng) -> String {
    let n = rng.gen_range(2..=3);
    (0..n).map(|_| *COMMON_WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

pub struct ToyData {
    /// One table per recognizer.
    pub sources: Vec<Vec<CorruptionPair>>,
    pub paragraphs: Vec<String>,
    /// `(written, spoken, frequency)`
    pub norm_dict: Vec<(String, String, u64)>,
    pub reference_phrases: Vec<Phrase>,
}

fn number_words(n: u64) -> String {
    const ONES: [&str; 20] = [
        "zero",
        "one",
        "two",
        "three",
        "four",
        "five",
        "six",
        "seven",
        "eight",
        "nine",
        "ten",
        "eleven",
        "twelve",
        "thirteen",
        "fourteen",
        "fifteen",
        "sixteen",
        "seventeen",
        "eighteen",
        "nineteen",
    ];
    const TENS: [&str; 10] = ["", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"];
    match n {
        0..=19 => ONES[n as usize].to_string(),
        20..=99 if n.is_multiple_of(10) => TENS[(n / 10) as usize].to_string(),
        20..=99 => format!("{} {}", TENS[(n / 10) as usize], ONES[(n % 10) as usize]),
        100..=999 if n.is_multiple_of(100) => format!("{} hundred", ONES[(n / 100) as usize]),
        100..=999 => format!("{} hundred {}", ONES[(n / 100) as usize], number_words(n % 100)),
        _ => unreachable!("toy numbers stay below 1000"),
    }
}

fn year_words(y: u64) -> String {
    let (hi, lo) = (y / 100, y % 100);
    if (2000..2010).contains(&y) {
        return match lo {
            0 => "two thousand".into(),
            _ => format!("two thousand {}", number_words(lo)),
        };
    }
    match lo {
        0 => format!("{} hundred", number_words(hi)),
        1..=9 => format!("{} oh {}", number_words(hi), number_words(lo)),
        _ => format!("{} {}", number_words(hi), number_words(lo)),
    }
}

fn decade_words(d: u64) -> String {
    let tens =
        ["", "tens", "twenties", "thirties", "forties", "fifties", "sixties", "seventies", "eighties", "nineties"];
    let hi = d / 100;
    let t = (d % 100) / 10;
    if t == 0 {
        format!("{} hundreds", number_words(hi))
    } else {
        format!("{} {}", number_words(hi), tens[t as usize])
    }
}

/// Exactly `n` distinct written forms.
fn build_norm_dict(n: usize) -> Vec<(String, String, u64)> {
    let mut rows: BTreeMap<String, (String, u64)> = BTreeMap::new();
    let fixed = [
        ("St.", "saint"),
        ("Dr.", "doctor"),
        ("Mr.", "mister"),
        ("Mrs.", "missus"),
        ("No.", "number"),
        ("km", "kilometers"),
        ("kg", "kilograms"),
        ("%", "percent"),
        ("&", "and"),
        ("U.S.", "u s"),
        ("St. Louis", "saint louis"),
        ("World War II", "world war two"),
    ];
    for (i, (w, s)) in fixed.iter().enumerate() {
        rows.insert(w.to_string(), (s.to_string(), 50 + i as u64));
    }
    for d in (1800..2000).step_by(10) {
        rows.insert(format!("{d}s"), (decade_words(d), 20));
    }
    for y in (1850..2030).step_by(3) {
        rows.insert(y.to_string(), (year_words(y), 30));
    }
    let mut k = 0;
    while rows.len() < n {
        rows.insert(k.to_string(), (number_words(k), 40));
        k += 1;
    }
    rows.into_iter().take(n).map(|(w, (s, f))| (w, s, f)).collect()
}

/// The toy dataset: `paragraphs` corpus lines, `pairs` corruption rows over
/// two recognizers and a dictionary of `dict_entries` written forms.
pub fn toy_data(seed: u64, paragraphs: usize, pairs: usize, dict_entries: usize) -> ToyData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let src = [SourceId::new("asr_a").unwrap(), SourceId::new("asr_b").unwrap()];

    let mut rows: BTreeMap<(String, String, usize), u64> = BTreeMap::new();
    let mut names: Vec<String> = Vec::new();
    for (orig, variants) in FIXED {
        names.push(orig.to_string());
        for (i, (recog, count)) in variants.iter().enumerate() {
            rows.insert((orig.to_string(), recog.to_string(), i % 2), *count);
        }
    }
    let common: BTreeSet<&str> = COMMON_WORDS.iter().copied().collect();
    let mut used: BTreeSet<String> = names.iter().cloned().collect();
    while rows.len() < pairs {
        let words = if rng.gen_bool(0.7) { 1 } else { rng.gen_range(2..=3) };
        let name = (0..words).map(|_| name_word(&mut rng)).collect::<Vec<_>>().join(" ");
        if name.split(' ').any(|w| common.contains(w)) || !used.insert(name.clone()) {
            continue;
        }
        names.push(name.clone());
        let n_variants = rng.gen_range(1..=5);
        for v in 0..n_variants {
            if rows.len() >= pairs {
                break;
            }
            let recog = match v {
                0 if rng.gen_bool(0.4) => name.clone(),
                _ if rng.gen_bool(0.12) => lookalike(&mut rng),
                _ => corrupt(&name, &mut rng),
            };
            let Some(recog) = Phrase::normalize(&recog) else { continue };
            let count = if recog.as_str() == name { rng.gen_range(5..60) } else { rng.gen_range(1..12) };
            rows.insert((name.clone(), recog.into_string(), rng.gen_range(0..2)), count);
        }
    }
    let mut sources = vec![Vec::new(), Vec::new()];
    for ((o, r, s), count) in rows {
        sources[s].push(
            CorruptionPair::new(Phrase::new(o).unwrap(), Phrase::new(r).unwrap(), count, src[s].clone()).unwrap(),
        );
    }

    let norm_dict = build_norm_dict(dict_entries);
    let written: Vec<&str> = norm_dict.iter().map(|(w, _, _)| w.as_str()).collect();
    let mut out = Vec::with_capacity(paragraphs);
    for _ in 0..paragraphs {
        let sentences = rng.gen_range(2..=5);
        let mut p = String::new();
        for _ in 0..sentences {
            let len = rng.gen_range(8..=20);
            let mut words: Vec<String> = (0..len).map(|_| COMMON_WORDS.choose(&mut rng).unwrap().to_string()).collect();
            for _ in 0..rng.gen_range(1..=2) {
                let name = names.choose(&mut rng).unwrap();
                let name = if rng.gen_bool(0.6) { capitalize(name) } else { name.clone() };
                let at = rng.gen_range(0..=words.len());
                words.insert(at, name);
            }
            if rng.gen_bool(0.4) {
                let at = rng.gen_range(0..=words.len());
                words.insert(at, written.choose(&mut rng).unwrap().to_string());
            }
            if rng.gen_bool(0.05) {
                let at = rng.gen_range(0..=words.len());
                words.insert(at, rng.gen_range(10_000_000_000u64..99_999_999_999_999).to_string());
            }
            if rng.gen_bool(0.1) {
                let at = rng.gen_range(0..words.len());
                words.insert(at, "nuts and".into());
            }
            let mut s = words.join(" ");
            if let Some(first) = s.get(..1) {
                s = first.to_uppercase() + &s[1..];
            }
            if rng.gen_bool(0.3) {
                let cut = s.rfind(' ').unwrap_or(0);
                if cut > 0 {
                    s.insert(cut, ',');
                }
            }
            s.push('.');
            if !p.is_empty() {
                p.push(' ');
            }
            p.push_str(&s);
        }
        out.push(p);
    }
    let mut reference_phrases: Vec<Phrase> = names.iter().map(|n| Phrase::new(n.as_str()).unwrap()).collect();
    reference_phrases.sort();
    reference_phrases.dedup();
    ToyData { sources, paragraphs: out, norm_dict, reference_phrases }
}

fn capitalize(phrase: &str) -> String {
    phrase
        .split(' ')
        .map(|w| {
            let mut c = w.chars();
            match c.next() {
                Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Dictionary rows as TSV text.
pub fn norm_dict_tsv(rows: &[(String, String, u64)]) -> String {
    rows.iter().fold(String::new(), |mut s, (w, sp, f)| {
        let _ = writeln!(s, "{w}\t{sp}\t{f}");
        s
    })
}

/// Bundled toy dataset parameters.
pub const TOY_SEED: u64 = 20231004;
pub const TOY_PARAGRAPHS: usize = 500;
pub const TOY_PAIRS: usize = 1000;
pub const TOY_DICT_ENTRIES: usize = 200;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_determinism() {
        let a = toy_data(1, 50, 300, 200);
        assert_eq!(a.sources.iter().map(Vec::len).sum::<usize>(), 300);
        assert_eq!(a.paragraphs.len(), 50);
        assert_eq!(a.norm_dict.len(), 200);
        let b = toy_data(1, 50, 300, 200);
        assert_eq!(a.paragraphs, b.paragraphs);
    }

    #[test]
    fn spoken_numbers() {
        assert_eq!(number_words(42), "forty two");
        assert_eq!(number_words(115), "one hundred fifteen");
        assert_eq!(year_words(1905), "nineteen oh five");
        assert_eq!(year_words(1850), "eighteen fifty");
        assert_eq!(decade_words(1850), "eighteen fifties");
        assert_eq!(decade_words(1900), "nineteen hundreds");
        assert_eq!(year_words(2003), "two thousand three");
    }
}
