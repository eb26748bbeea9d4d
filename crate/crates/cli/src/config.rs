//! Pipeline configuration: a TOML file with one section per stage.
//!
//! Relative paths resolve against the directory of the config file.
//! `--set section.key=value` overrides are applied before validation; the
//! value is parsed as TOML and falls back to a plain string.

use std::path::{Path, PathBuf};

use biasgen_core::align::{AlignParams, Decoding, ExpansionParams};
use biasgen_core::{FilterThresholds, RelatedParams, SamplingStrategy};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub pipeline: PipelineSection,
    #[serde(default)]
    pub inputs: Inputs,
    #[serde(default)]
    pub align: AlignSection,
    #[serde(default)]
    pub expand: ExpansionParams,
    #[serde(default)]
    pub idf: FilterThresholds,
    #[serde(default)]
    pub index: IndexSection,
    #[serde(default)]
    pub related: RelatedParams,
    #[serde(default)]
    pub synthesize: SynthesizeSection,
    #[serde(default)]
    pub eval: EvalSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSection {
    /// Directory receiving every stage output.
    pub work_dir: PathBuf,
    #[serde(default = "default_shards")]
    pub shard_count: usize,
    #[serde(default)]
    pub rng_seed: u64,
}

fn default_shards() -> usize {
    1
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    /// Corruption pair tables, one per recognizer.
    pub corruptions: Vec<PathBuf>,
    /// One paragraph per line.
    pub corpus: Option<PathBuf>,
    /// written, spoken, frequency rows.
    pub norm_dict: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignSection {
    pub iterations: usize,
    pub tension: f64,
    pub decoding: Decoding,
}

impl Default for AlignSection {
    fn default() -> Self {
        let p = AlignParams::default();
        AlignSection { iterations: p.iterations, tension: p.tension, decoding: Decoding::Monotonic }
    }
}

impl AlignSection {
    pub fn params(&self) -> AlignParams {
        AlignParams { iterations: self.iterations, tension: self.tension }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndexSection {
    /// Paragraphs scanned per parallel batch.
    pub batch_size: usize,
}

impl Default for IndexSection {
    fn default() -> Self {
        IndexSection { batch_size: 4096 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesizeSection {
    pub examples_per_paragraph: u32,
    pub list_size: usize,
    pub p_correct: f64,
    pub fp_range: [usize; 2],
    pub max_related: usize,
    pub allow_self_replacement: bool,
    pub snippet_word_range: [usize; 2],
}

impl Default for SynthesizeSection {
    fn default() -> Self {
        let s = SamplingStrategy::default();
        SynthesizeSection {
            examples_per_paragraph: 1,
            list_size: s.list_size,
            p_correct: s.p_correct,
            fp_range: s.fp_range,
            max_related: s.max_related,
            allow_self_replacement: s.allow_self_replacement,
            snippet_word_range: s.snippet_word_range,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub references: Option<PathBuf>,
    pub hypotheses: Option<PathBuf>,
    /// Uncorrected transcriptions; enables the changed-sentence rate and
    /// correction-only recall.
    pub baseline: Option<PathBuf>,
    /// One biasing phrase per line.
    pub vocab: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn strategy(&self) -> SamplingStrategy {
        let s = &self.synthesize;
        SamplingStrategy {
            list_size: s.list_size,
            p_correct: s.p_correct,
            fp_range: s.fp_range,
            max_related: s.max_related,
            allow_self_replacement: s.allow_self_replacement,
            snippet_word_range: s.snippet_word_range,
            rng_seed: self.pipeline.rng_seed,
        }
    }

    /// Loads `path`, applies overrides and resolves relative paths.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut table: toml::Table = text.parse().map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut cfg: PipelineConfig =
            table.try_into().map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.pipeline.work_dir);
        self.inputs.corruptions.iter_mut().for_each(fix);
        for p in [
            &mut self.inputs.corpus,
            &mut self.inputs.norm_dict,
            &mut self.eval.references,
            &mut self.eval.hypotheses,
            &mut self.eval.baseline,
            &mut self.eval.vocab,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    /// Range checks; input existence is checked per stage.
    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |e: biasgen_core::Error| CliError::Config(e.to_string());
        if self.pipeline.shard_count == 0 {
            return Err(CliError::Config("pipeline.shard_count must be positive".into()));
        }
        if self.align.iterations == 0 || !(self.align.tension >= 0.0 && self.align.tension.is_finite()) {
            return Err(CliError::Config(
                "align.iterations must be positive and align.tension finite and non-negative".into(),
            ));
        }
        if self.expand.max_order == 0 || !(0.0..=1.0).contains(&self.expand.overlap_drop) {
            return Err(CliError::Config("expand.max_order must be positive and expand.overlap_drop in [0,1]".into()));
        }
        if self.index.batch_size == 0 {
            return Err(CliError::Config("index.batch_size must be positive".into()));
        }
        if self.synthesize.examples_per_paragraph == 0 {
            return Err(CliError::Config("synthesize.examples_per_paragraph must be positive".into()));
        }
        self.idf.validate().map_err(cfg)?;
        self.related.validate().map_err(cfg)?;
        self.strategy().validate().map_err(cfg)?;
        Ok(())
    }

    /// `section.key=value` lines of the effective configuration, sorted.
    pub fn snapshot(&self) -> Vec<(String, String)> {
        let value = toml::Value::try_from(self).expect("config serializes");
        let mut out = Vec::new();
        flatten("", &value, &mut out);
        out.sort();
        out
    }
}

fn flatten(prefix: &str, v: &toml::Value, out: &mut Vec<(String, String)>) {
    match v {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        toml::Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) =
        spec.split_once('=').ok_or_else(|| CliError::Config(format!("override {spec:?} is not key=value")))?;
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    let (last, sections) = parts.split_last().expect("split yields one part");
    let mut cur = table;
    for s in sections {
        cur = cur
            .entry(s.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override {key}: {s} is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_and_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "[pipeline]\nwork_dir = \"out\"\n").unwrap();
        let cfg = PipelineConfig::load(&p, &["synthesize.p_correct=1.0".into(), "pipeline.rng_seed=7".into()]).unwrap();
        assert_eq!(cfg.synthesize.p_correct, 1.0);
        assert_eq!(cfg.strategy().rng_seed, 7);
        assert_eq!(cfg.pipeline.work_dir, dir.path().join("out"));
        assert_eq!(cfg.align.decoding, Decoding::Monotonic);
        assert!(cfg.snapshot().iter().any(|(k, v)| k == "synthesize.list_size" && v == "10"));
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "[pipeline]\nwork_dir = \"out\"\n[synthesize]\nlist_size = 3\n").unwrap();
        assert!(matches!(PipelineConfig::load(&p, &[]), Err(CliError::Config(_))));
        std::fs::write(&p, "[pipeline]\nwork_dir = \"out\"\nbogus = 1\n").unwrap();
        assert!(matches!(PipelineConfig::load(&p, &[]), Err(CliError::Config(_))));
    }
}
