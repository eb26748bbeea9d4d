use super::{alignment_prior, AlignModel};
use crate::phrase::Phrase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decoding {
    /// Each recognized character independently takes its most probable
    /// source.
    #[default]
    Independent,
    /// Non-NULL links must be non-decreasing in the reference index.
    Monotonic,
}

/// Links from recognized characters to reference characters.
///
/// `links[j]` is the reference index generating recognized character `j`,
/// or `None` for NULL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharAlignment {
    pub links: Vec<Option<usize>>,
}

impl CharAlignment {
    /// `(orig_index, recog_index)` for every non-NULL link.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.links.iter().enumerate().filter_map(|(j, l)| l.map(|i| (i, j)))
    }
}

/// Most probable alignment of `recog` to `orig`: each link maximizes the
/// product of alignment prior and translation probability.
///
/// Ties prefer the smallest reference index, and any reference character
/// over NULL.
pub fn viterbi_align(orig: &Phrase, recog: &Phrase, model: &AlignModel, decoding: Decoding) -> CharAlignment {
    let src: Vec<char> = orig.as_str().chars().collect();
    let tgt: Vec<char> = recog.as_str().chars().collect();
    // scores[j][0] is NULL, scores[j][1 + i] is reference position i.
    let mut prior = Vec::new();
    let scores: Vec<Vec<f64>> = tgt
        .iter()
        .enumerate()
        .map(|(j, &f)| {
            alignment_prior(src.len(), tgt.len(), j, model.tension, &mut prior);
            std::iter::once(None)
                .chain(src.iter().copied().map(Some))
                .zip(&prior)
                .map(|(e, &a)| a * model.table.prob(e, f))
                .collect()
        })
        .collect();
    match decoding {
        Decoding::Independent => independent(&scores),
        Decoding::Monotonic => monotonic(src.len(), &scores),
    }
}

fn independent(scores: &[Vec<f64>]) -> CharAlignment {
    let links = scores
        .iter()
        .map(|row| {
            let mut best: Option<(usize, f64)> = None;
            for (i, &p) in row[1..].iter().enumerate() {
                if best.is_none_or(|(_, b)| p > b) {
                    best = Some((i, p));
                }
            }
            match best {
                Some((i, p)) if p >= row[0] => Some(i),
                _ => None,
            }
        })
        .collect();
    CharAlignment { links }
}

fn monotonic(l: usize, scores: &[Vec<f64>]) -> CharAlignment {
    // State s = 1 + index of the latest non-NULL link, 0 before any link.
    let states = l + 1;
    let mut score = vec![f64::NEG_INFINITY; states];
    score[0] = 0.0;
    let mut back: Vec<Vec<(usize, Option<usize>)>> = Vec::with_capacity(scores.len());
    for row in scores {
        let null = row[0].ln();
        let mut next = vec![f64::NEG_INFINITY; states];
        let mut ptr = vec![(0usize, None); states];
        // Best predecessor among states 0..=s, earliest on ties.
        let mut prefix_best = (f64::NEG_INFINITY, 0usize);
        for s in 0..states {
            if score[s] > prefix_best.0 {
                prefix_best = (score[s], s);
            }
            if s > 0 {
                let link = prefix_best.0 + row[s].ln();
                if link > next[s] {
                    next[s] = link;
                    ptr[s] = (prefix_best.1, Some(s - 1));
                }
            }
        }
        for s in 0..states {
            let stay = score[s] + null;
            if stay > next[s] {
                next[s] = stay;
                ptr[s] = (s, None);
            }
        }
        back.push(ptr);
        score = next;
    }
    let mut state =
        (0..states).fold((f64::NEG_INFINITY, 0), |acc, s| if score[s] > acc.0 { (score[s], s) } else { acc }).1;
    let mut links = vec![None; scores.len()];
    for j in (0..scores.len()).rev() {
        let (prev, link) = back[j][state];
        links[j] = link;
        state = prev;
    }
    CharAlignment { links }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::train_alignment;
    use crate::corpus::{CorruptionPair, SourceId};

    fn pair(o: &str, r: &str) -> CorruptionPair {
        CorruptionPair::new(Phrase::new(o).unwrap(), Phrase::new(r).unwrap(), 1, SourceId::new("asr_a").unwrap())
            .unwrap()
    }

    #[test]
    fn identity_alignment() {
        let model = train_alignment(&vec![pair("abc", "abc"); 50], 5).unwrap().model;
        let p = Phrase::new("abc").unwrap();
        for d in [Decoding::Independent, Decoding::Monotonic] {
            let a = viterbi_align(&p, &p, &model, d);
            assert_eq!(a.pairs().collect::<Vec<_>>(), vec![(0, 0), (1, 1), (2, 2)]);
        }
    }

    #[test]
    fn monotonic_never_goes_backwards() {
        let pairs = vec![pair("abc", "abc"), pair("ab", "ba"), pair("ca", "ac")];
        let model = train_alignment(&pairs, 5).unwrap().model;
        let a = viterbi_align(&Phrase::new("abc").unwrap(), &Phrase::new("cba").unwrap(), &model, Decoding::Monotonic);
        let idx: Vec<usize> = a.links.iter().flatten().copied().collect();
        assert!(idx.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(a.links.len(), 3);
    }

    #[test]
    fn unknown_characters_still_decode() {
        let model = train_alignment(&[pair("ab", "ab")], 2).unwrap().model;
        let a = viterbi_align(&Phrase::new("xyz").unwrap(), &Phrase::new("q").unwrap(), &model, Decoding::Independent);
        // All translation scores are floored, so the prior picks the middle.
        assert_eq!(a.links, vec![Some(1)]);
    }
}
