//! Training-example synthesis: snippet cutting, phrase corruption and
//! biasing-list assembly.

mod biasing;
mod snippet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use biasing::{assemble_biasing_list, emit_example};
pub use snippet::{corrupt_snippet, cut_snippet, CorruptedSnippet, Snippet, SnippetOccurrence};

use crate::corpus::{ParagraphRecord, TrainingExample};
use crate::error::{Error, Result};
use crate::inventory::Inventory;
use crate::negative::NegativePools;
use crate::phrase::{Phrase, Span};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingStrategy {
    /// Candidates per biasing list.
    pub list_size: usize,
    /// Probability that the substituted phrases are listed as candidates.
    pub p_correct: f64,
    /// Inclusive bounds on false-positive candidates.
    pub fp_range: [usize; 2],
    pub max_related: usize,
    pub allow_self_replacement: bool,
    /// Inclusive bounds on snippet length in words.
    pub snippet_word_range: [usize; 2],
    pub rng_seed: u64,
}

impl Default for SamplingStrategy {
    fn default() -> Self {
        SamplingStrategy {
            list_size: 10,
            p_correct: 0.5,
            fp_range: [1, 3],
            max_related: 3,
            allow_self_replacement: true,
            snippet_word_range: [5, 25],
            rng_seed: 0,
        }
    }
}

impl SamplingStrategy {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.list_size == 0 || self.list_size > u8::MAX as usize {
            return bad(format!("list_size {} outside 1..=255", self.list_size));
        }
        if !(0.0..=1.0).contains(&self.p_correct) {
            return bad(format!("p_correct {} outside [0,1]", self.p_correct));
        }
        if self.fp_range[0] > self.fp_range[1] {
            return bad(format!("fp_range {:?} is empty", self.fp_range));
        }
        if self.fp_range[1] + self.max_related + 1 > self.list_size {
            return bad(format!(
                "fp_range max {} + max_related {} + 1 exceeds list_size {}",
                self.fp_range[1], self.max_related, self.list_size
            ));
        }
        let [lo, hi] = self.snippet_word_range;
        if lo == 0 || lo > hi {
            return bad(format!("snippet_word_range {:?} invalid", self.snippet_word_range));
        }
        Ok(())
    }

    /// Most distinct phrases substituted in one snippet: room left in the
    /// list once the largest negative quotas are reserved.
    pub fn max_positives(&self) -> usize {
        self.list_size - self.fp_range[1] - self.max_related
    }
}

/// Words of keystream reserved for one example.
const EXAMPLE_STREAM_WORDS: u128 = 1 << 40;

/// Random stream of one example: the seed keys the generator, the paragraph
/// id selects the stream and the example index an offset within it. Streams
/// for different `(paragraph_id, example_index)` never overlap in practice.
pub fn example_rng(seed: u64, paragraph_id: u64, example_index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(paragraph_id);
    rng.set_word_pos(example_index as u128 * EXAMPLE_STREAM_WORDS);
    rng
}

/// Shared read-only state for generating examples.
pub struct Synthesizer<'a> {
    inventory: &'a Inventory,
    pools: &'a NegativePools,
    global_pool: Vec<Phrase>,
    strategy: SamplingStrategy,
}

impl<'a> Synthesizer<'a> {
    /// Random candidates are drawn from the inventory's reference phrases.
    pub fn new(inventory: &'a Inventory, pools: &'a NegativePools, strategy: SamplingStrategy) -> Result<Self> {
        strategy.validate()?;
        Ok(Synthesizer { inventory, pools, global_pool: inventory.origs().cloned().collect(), strategy })
    }

    pub fn strategy(&self) -> &SamplingStrategy {
        &self.strategy
    }

    pub fn global_pool(&self) -> &[Phrase] {
        &self.global_pool
    }

    /// Example `example_index` of a paragraph; reproducible from the
    /// strategy seed alone.
    pub fn example(
        &self,
        record: &ParagraphRecord,
        skip_spans: &[Span],
        example_index: u32,
    ) -> Result<TrainingExample> {
        let mut rng = example_rng(self.strategy.rng_seed, record.id, example_index);
        let snippet = cut_snippet(record, skip_spans, &self.strategy, &mut rng)?;
        let corrupted = corrupt_snippet(&snippet, self.inventory, &self.strategy, &mut rng)?;
        let candidates = assemble_biasing_list(
            &corrupted.substitutions,
            &corrupted.corrupted,
            self.pools,
            &self.global_pool,
            &self.strategy,
            &mut rng,
        )?;
        emit_example(corrupted, candidates)
    }
}
