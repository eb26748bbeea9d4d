//! Aho-Corasick automaton over `char` with overlapping match reporting.

use std::collections::HashMap;

const ROOT: u32 = 0;

#[derive(Debug, Clone, Default)]
struct State {
    /// Sorted by character for binary search.
    next: Vec<(char, u32)>,
    fail: u32,
    /// Pattern ending exactly at this state, if any.
    output: Option<u32>,
    /// Nearest state on the failure chain that carries an output.
    dict_link: Option<u32>,
}

impl State {
    fn child(&self, c: char) -> Option<u32> {
        self.next.binary_search_by_key(&c, |&(k, _)| k).ok().map(|i| self.next[i].1)
    }
}

/// Counts automaton work during a scan: goto transitions taken and failure
/// links followed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepCounter {
    pub transitions: u64,
    pub failures: u64,
    pub matches: u64,
}

#[derive(Debug, Clone)]
pub struct Automaton {
    states: Vec<State>,
    pattern_lens: Vec<u32>,
}

impl Automaton {
    /// Builds the trie and failure links. Patterns must be distinct and
    /// non-empty; pattern `i` is reported as id `i`.
    pub fn new<'a>(patterns: impl IntoIterator<Item = &'a [char]>) -> Self {
        let mut states = vec![State::default()];
        let mut pattern_lens = Vec::new();
        let mut pending: Vec<HashMap<char, u32>> = vec![HashMap::new()];
        for (id, pat) in patterns.into_iter().enumerate() {
            let mut cur = ROOT as usize;
            for &c in pat {
                let nxt = match pending[cur].get(&c) {
                    Some(&s) => s as usize,
                    None => {
                        let s = states.len();
                        states.push(State::default());
                        pending.push(HashMap::new());
                        pending[cur].insert(c, s as u32);
                        s
                    }
                };
                cur = nxt;
            }
            debug_assert!(states[cur].output.is_none(), "duplicate pattern");
            states[cur].output = Some(id as u32);
            pattern_lens.push(pat.len() as u32);
        }
        for (state, map) in states.iter_mut().zip(pending) {
            state.next = map.into_iter().collect();
            state.next.sort_unstable_by_key(|&(c, _)| c);
        }

        // Breadth-first failure links.
        let mut queue = std::collections::VecDeque::new();
        for i in 0..states[0].next.len() {
            let s = states[0].next[i].1;
            states[s as usize].fail = ROOT;
            queue.push_back(s);
        }
        while let Some(s) = queue.pop_front() {
            for i in 0..states[s as usize].next.len() {
                let (c, child) = states[s as usize].next[i];
                let mut f = states[s as usize].fail;
                let fail = loop {
                    if let Some(t) = states[f as usize].child(c) {
                        break t;
                    }
                    if f == ROOT {
                        break ROOT;
                    }
                    f = states[f as usize].fail;
                };
                let fail_state = &states[fail as usize];
                let dict_link = if fail_state.output.is_some() { Some(fail) } else { fail_state.dict_link };
                let ch = &mut states[child as usize];
                ch.fail = fail;
                ch.dict_link = dict_link;
                queue.push_back(child);
            }
        }
        Automaton { states, pattern_lens }
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn pattern_len(&self, id: u32) -> usize {
        self.pattern_lens[id as usize] as usize
    }

    /// Calls `on_match(pattern_id, end)` for every occurrence (including
    /// overlapping ones), where `end` is the exclusive end offset.
    pub fn for_each_match(&self, text: &[char], counter: &mut StepCounter, mut on_match: impl FnMut(u32, usize)) {
        let mut cur = ROOT;
        for (i, &c) in text.iter().enumerate() {
            loop {
                if let Some(n) = self.states[cur as usize].child(c) {
                    counter.transitions += 1;
                    cur = n;
                    break;
                }
                if cur == ROOT {
                    break;
                }
                counter.failures += 1;
                cur = self.states[cur as usize].fail;
            }
            let st = &self.states[cur as usize];
            let mut out = if st.output.is_some() { Some(cur) } else { st.dict_link };
            while let Some(o) = out {
                let os = &self.states[o as usize];
                counter.matches += 1;
                on_match(os.output.expect("dictionary link targets an output state"), i + 1);
                out = os.dict_link;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    #[test]
    fn classic_overlaps() {
        let pats: Vec<Vec<char>> = ["he", "she", "his", "hers"].iter().map(|s| chars(s)).collect();
        let ac = Automaton::new(pats.iter().map(|p| p.as_slice()));
        let mut found = Vec::new();
        let mut counter = StepCounter::default();
        ac.for_each_match(&chars("ushers"), &mut counter, |id, end| found.push((id, end)));
        found.sort();
        assert_eq!(found, vec![(0, 4), (1, 4), (3, 6)]);
        assert_eq!(counter.matches, 3);
    }
}
