//! Batch generation of training data for contextual ASR spelling correction.
//!
//! The pipeline expands a corruption inventory of (reference phrase,
//! recognized phrase) pairs by character alignment, finds reference phrases
//! in a paragraph corpus, mines hard-negative biasing phrases, and emits
//! training examples: a corrupted hypothesis snippet plus a labelled biasing
//! list with per-character tags.

pub mod align;
pub mod corpus;
pub mod error;
pub mod index;
pub mod inventory;
pub mod metrics;
pub mod negative;
pub mod normalize;
pub mod phrase;
pub mod synth;

pub use corpus::{
    Candidate, CandidateLabel, CorruptionPair, FalsePositivePair, IdfTable, Occurrence, ParagraphRecord, RelatedPair,
    SourceId, Substitution, TrainingExample,
};
pub use error::{Error, Result};
pub use index::{Hit, PatternSet};
pub use inventory::{FilterThresholds, Inventory, Variant};
pub use metrics::{ErrorCounts, PrecisionRecall};
pub use negative::{NegativePools, PhoneticKey, RelatedParams};
pub use normalize::{NormalizationDict, NormalizedText};
pub use phrase::{Phrase, Span};
pub use synth::{SamplingStrategy, Synthesizer};
