//! One function per pipeline stage. Every stage reads its inputs from the
//! configured paths or the work directory, writes its outputs to the work
//! directory and finishes with a manifest.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use biasgen_core::align::{extract_subphrases, train_alignment_with, viterbi_align, AlignModel, TranslationTable};
use biasgen_core::corpus::tsv::{create_writer, read_all, read_table, write_records, write_table, LineReader};
use biasgen_core::index::build_keys2paragraph;
use biasgen_core::inventory::{compute_idf_batched, filter_keys, merge_sources, read_idf, write_idf};
use biasgen_core::metrics::{align, biasing_precision_recall, changed_sentence_rate, ErrorCounts};
use biasgen_core::negative::{mine_false_positives_batched, mine_related};
use biasgen_core::normalize::{format_skip_spans, load_dictionary, normalize_text, parse_skip_spans};
use biasgen_core::{
    CorruptionPair, Error, FalsePositivePair, Inventory, NegativePools, ParagraphRecord, PatternSet, Phrase,
    RelatedPair, SourceId, Synthesizer, TrainingExample,
};
use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::manifest::RunManifest;

pub const TRANSLATION_TABLE: &str = "translation_table.tsv";
pub const RAW_INVENTORY: &str = "keys2corruptions.raw.tsv";
pub const NORMALIZED_CORPUS: &str = "corpus.norm.txt";
pub const SKIP_SPANS: &str = "corpus.skip.txt";
pub const IDF: &str = "idf.tsv";
pub const INVENTORY: &str = "keys2corruptions.tsv";
pub const KEYS2PARAGRAPH: &str = "keys2paragraph.tsv";
pub const RELATED: &str = "keys2related.tsv";
pub const FALSE_POSITIVES: &str = "falsepositives.tsv";
pub const EXAMPLES: &str = "examples.tsv";
pub const METRICS: &str = "metrics.tsv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Align,
    Expand,
    Normalize,
    Idf,
    Index,
    MineRelated,
    MineFp,
    Synthesize,
    Eval,
    Stats,
}

/// Stages run by `synthesize-all`, in order.
pub const ALL: [Stage; 8] = [
    Stage::Align,
    Stage::Expand,
    Stage::Normalize,
    Stage::Idf,
    Stage::Index,
    Stage::MineRelated,
    Stage::MineFp,
    Stage::Synthesize,
];

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Align => "align",
            Stage::Expand => "expand",
            Stage::Normalize => "normalize",
            Stage::Idf => "idf",
            Stage::Index => "index",
            Stage::MineRelated => "mine-related",
            Stage::MineFp => "mine-fp",
            Stage::Synthesize => "synthesize",
            Stage::Eval => "eval",
            Stage::Stats => "stats",
        }
    }

    /// External inputs and work-directory inputs and outputs.
    fn plan(self, cfg: &PipelineConfig) -> (Vec<Option<PathBuf>>, Vec<&'static str>, Vec<&'static str>) {
        let i = &cfg.inputs;
        let e = &cfg.eval;
        let corruptions = || i.corruptions.iter().cloned().map(Some).collect::<Vec<_>>();
        match self {
            Stage::Align => (corruptions(), vec![], vec![TRANSLATION_TABLE]),
            Stage::Expand => (corruptions(), vec![TRANSLATION_TABLE], vec![RAW_INVENTORY]),
            Stage::Normalize => {
                (vec![i.corpus.clone(), i.norm_dict.clone()], vec![], vec![NORMALIZED_CORPUS, SKIP_SPANS])
            }
            Stage::Idf => (vec![], vec![RAW_INVENTORY, NORMALIZED_CORPUS], vec![IDF, INVENTORY]),
            Stage::Index => (vec![], vec![INVENTORY, NORMALIZED_CORPUS], vec![KEYS2PARAGRAPH]),
            Stage::MineRelated => (vec![], vec![INVENTORY], vec![RELATED]),
            Stage::MineFp => (vec![], vec![INVENTORY, IDF, NORMALIZED_CORPUS], vec![FALSE_POSITIVES]),
            Stage::Synthesize => {
                (vec![], vec![INVENTORY, RELATED, FALSE_POSITIVES, KEYS2PARAGRAPH, SKIP_SPANS], vec![EXAMPLES])
            }
            Stage::Eval => {
                let mut ext = vec![e.references.clone(), e.hypotheses.clone(), e.vocab.clone()];
                if e.baseline.is_some() {
                    ext.push(e.baseline.clone());
                }
                (ext, vec![], vec![METRICS])
            }
            Stage::Stats => (vec![], vec![], vec![]),
        }
    }

    /// Fails with a config error when an external input is unset or missing.
    pub fn check_inputs(self, cfg: &PipelineConfig) -> Result<(), CliError> {
        let (ext, _, _) = self.plan(cfg);
        if matches!(self, Stage::Align | Stage::Expand) && ext.is_empty() {
            return Err(CliError::Config("inputs.corruptions is empty".into()));
        }
        for p in ext {
            match p {
                None => return Err(CliError::Config(format!("{}: an input path is not configured", self.name()))),
                Some(p) if !p.is_file() => {
                    return Err(CliError::Config(format!("{}: input {} does not exist", self.name(), p.display())))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    pub fn describe(self, cfg: &PipelineConfig) -> String {
        let (ext, reads, writes) = self.plan(cfg);
        let mut ins: Vec<String> =
            ext.into_iter().map(|p| p.map_or("<unset>".into(), |p| p.display().to_string())).collect();
        ins.extend(reads.iter().map(|r| cfg.pipeline.work_dir.join(r).display().to_string()));
        let outs: Vec<String> = writes.iter().map(|w| cfg.pipeline.work_dir.join(w).display().to_string()).collect();
        format!("{}: [{}] -> [{}]", self.name(), ins.join(", "), outs.join(", "))
    }

    pub fn run(self, cfg: &PipelineConfig) -> Result<(), CliError> {
        self.check_inputs(cfg)?;
        std::fs::create_dir_all(&cfg.pipeline.work_dir)?;
        match self {
            Stage::Align => run_align(cfg),
            Stage::Expand => run_expand(cfg),
            Stage::Normalize => run_normalize(cfg),
            Stage::Idf => run_idf(cfg),
            Stage::Index => run_index(cfg),
            Stage::MineRelated => run_mine_related(cfg),
            Stage::MineFp => run_mine_fp(cfg),
            Stage::Synthesize => run_synthesize(cfg),
            Stage::Eval => run_eval(cfg),
            Stage::Stats => run_stats(cfg),
        }
    }
}

fn work(cfg: &PipelineConfig, name: &str) -> PathBuf {
    cfg.pipeline.work_dir.join(name)
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn load_sources(cfg: &PipelineConfig, m: &mut RunManifest) -> Result<Inventory, CliError> {
    let mut streams = Vec::new();
    for p in &cfg.inputs.corruptions {
        m.input(p);
        streams.push(read_all::<CorruptionPair>(p)?);
    }
    Ok(merge_sources(streams)?)
}

fn corpus_lines(path: &Path) -> Result<impl Iterator<Item = biasgen_core::Result<String>>, CliError> {
    Ok(LineReader::open(path)?.map(|r| r.map(|(_, s)| s)))
}

fn run_align(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut m = RunManifest::start("align");
    let inv = load_sources(cfg, &mut m)?;
    let pairs: Vec<CorruptionPair> = inv.pairs().collect();
    let trained = train_alignment_with(&pairs, &cfg.align.params())?;
    let out = work(cfg, TRANSLATION_TABLE);
    trained.model.table.write_tsv(&out)?;
    m.output(&out);
    m.count("pairs", pairs.len() as u64);
    m.count("table_entries", trained.model.table.entries().count() as u64);
    eprintln!(
        "align: {} pairs, log-likelihood {:.4} -> {:.4}",
        pairs.len(),
        trained.log_likelihoods[0],
        trained.log_likelihoods.last().copied().unwrap_or(f64::NAN)
    );
    m.finish(cfg)?;
    Ok(())
}

fn run_expand(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut m = RunManifest::start("expand");
    let inv = load_sources(cfg, &mut m)?;
    let table_path = work(cfg, TRANSLATION_TABLE);
    m.input(&table_path);
    let model = AlignModel { table: TranslationTable::read_tsv(&table_path)?, tension: cfg.align.tension };
    let pairs: Vec<CorruptionPair> = inv.pairs().collect();
    let per_pair: Vec<Vec<CorruptionPair>> = pairs
        .par_iter()
        .map(|p| {
            let a = viterbi_align(&p.orig, &p.recog, &model, cfg.align.decoding);
            extract_subphrases(p, &a, &cfg.expand)
                .into_iter()
                // The whole-phrase segment repeats the parent pair.
                .filter(|s| !(s.orig == p.orig && s.recog == p.recog))
                .collect()
        })
        .collect();
    let mut expanded: BTreeMap<(Phrase, Phrase), u64> = BTreeMap::new();
    for s in per_pair.into_iter().flatten() {
        *expanded.entry((s.orig, s.recog)).or_default() += s.count;
    }
    let expansion_stream: Vec<CorruptionPair> = expanded
        .into_iter()
        .map(|((orig, recog), count)| CorruptionPair { orig, recog, count, source: SourceId::subphrase_expansion() })
        .collect();
    let n_expanded = expansion_stream.len() as u64;
    let merged = merge_sources([pairs, expansion_stream])?;
    let out = work(cfg, RAW_INVENTORY);
    let rows: Vec<CorruptionPair> = merged.pairs().collect();
    let n = write_table(&out, &rows)?;
    m.output(&out);
    m.count("expansions", n_expanded);
    m.count("pairs", n);
    eprintln!("expand: {n_expanded} subphrase pairs, {n} rows in inventory");
    m.finish(cfg)?;
    Ok(())
}

fn run_normalize(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut m = RunManifest::start("normalize");
    let corpus = cfg.inputs.corpus.as_ref().expect("checked");
    let dict_path = cfg.inputs.norm_dict.as_ref().expect("checked");
    m.input(corpus);
    m.input(dict_path);
    let dict = load_dictionary(dict_path)?;
    let text_out = work(cfg, NORMALIZED_CORPUS);
    let skip_out = work(cfg, SKIP_SPANS);
    let mut tw = create_writer(&text_out)?;
    let mut sw = create_writer(&skip_out)?;
    let (mut paragraphs, mut skipped) = (0u64, 0u64);
    let mut batch = Vec::with_capacity(cfg.index.batch_size);
    let mut flush = |batch: &mut Vec<String>| -> Result<(), CliError> {
        let done: Vec<_> = batch.par_iter().map(|t| normalize_text(&dict, t)).collect();
        for n in done {
            paragraphs += 1;
            skipped += n.skip_spans.len() as u64;
            writeln!(tw, "{}", n.text).map_err(|e| io_err(&text_out, e))?;
            writeln!(sw, "{}", format_skip_spans(&n.skip_spans)).map_err(|e| io_err(&skip_out, e))?;
        }
        batch.clear();
        Ok(())
    };
    for line in corpus_lines(corpus)? {
        batch.push(line?);
        if batch.len() >= cfg.index.batch_size {
            flush(&mut batch)?;
        }
    }
    flush(&mut batch)?;
    tw.flush().map_err(|e| io_err(&text_out, e))?;
    sw.flush().map_err(|e| io_err(&skip_out, e))?;
    drop((tw, sw));
    m.output(&text_out);
    m.output(&skip_out);
    m.count("paragraphs", paragraphs);
    m.count("skip_spans", skipped);
    eprintln!(
        "normalize: {paragraphs} paragraphs, {skipped} unnormalized fragments, {} dictionary entries",
        dict.len()
    );
    m.finish(cfg)?;
    Ok(())
}

fn load_inventory(path: &Path) -> Result<Inventory, CliError> {
    Ok(merge_sources([read_all::<CorruptionPair>(path)?])?)
}

fn run_idf(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut m = RunManifest::start("idf");
    let raw_path = work(cfg, RAW_INVENTORY);
    let corpus = work(cfg, NORMALIZED_CORPUS);
    m.input(&raw_path);
    m.input(&corpus);
    let raw = load_inventory(&raw_path)?;
    let idf = compute_idf_batched(corpus_lines(&corpus)?, &raw.all_phrases(), cfg.index.batch_size)?;
    let idf_out = work(cfg, IDF);
    write_idf(&idf_out, &idf)?;
    let kept = filter_keys(&raw, &idf, &cfg.idf);
    let inv_out = work(cfg, INVENTORY);
    let rows: Vec<CorruptionPair> = kept.pairs().collect();
    let n = write_table(&inv_out, &rows)?;
    m.output(&idf_out);
    m.output(&inv_out);
    m.count("documents", idf.doc_count);
    m.count("scored_phrases", idf.scores.len() as u64);
    m.count("kept_keys", kept.orig_count() as u64);
    m.count("pairs", n);
    eprintln!("idf: {} documents, kept {} of {} reference phrases", idf.doc_count, kept.orig_count(), raw.orig_count());
    m.finish(cfg)?;
    Ok(())
}

fn run_index(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut m = RunManifest::start("index");
    let inv_path = work(cfg, INVENTORY);
    let corpus = work(cfg, NORMALIZED_CORPUS);
    m.input(&inv_path);
    m.input(&corpus);
    let inv = load_inventory(&inv_path)?;
    let matcher = PatternSet::new(inv.origs().cloned())?;
    let out = work(cfg, KEYS2PARAGRAPH);
    let mut w = create_writer(&out)?;
    let n = build_keys2paragraph(corpus_lines(&corpus)?, &matcher, cfg.index.batch_size, |r| {
        write_records(&mut w, [&r]).map(|_| ()).map_err(|e| Error::Io { path: out.clone(), source: e })
    })?;
    w.flush().map_err(|e| io_err(&out, e))?;
    drop(w);
    m.output(&out);
    m.count("patterns", matcher.len() as u64);
    m.count("paragraphs", n);
    eprintln!("index: {} keys found in {n} paragraphs", matcher.len());
    m.finish(cfg)?;
    Ok(())
}

fn run_mine_related(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut m = RunManifest::start("mine-related");
    let inv_path = work(cfg, INVENTORY);
    m.input(&inv_path);
    let inv = load_inventory(&inv_path)?;
    let pool = inv.origs().cloned().collect();
    let pairs = mine_related(&pool, &cfg.related)?;
    let out = work(cfg, RELATED);
    let n = write_table(&out, &pairs)?;
    m.output(&out);
    m.count("pairs", n);
    eprintln!("mine-related: {n} related pairs");
    m.finish(cfg)?;
    Ok(())
}

fn run_mine_fp(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut m = RunManifest::start("mine-fp");
    let inv_path = work(cfg, INVENTORY);
    let idf_path = work(cfg, IDF);
    let corpus = work(cfg, NORMALIZED_CORPUS);
    for p in [&inv_path, &idf_path, &corpus] {
        m.input(p);
    }
    let inv = load_inventory(&inv_path)?;
    let idf = read_idf(&idf_path)?;
    let pairs = mine_false_positives_batched(
        &inv,
        corpus_lines(&corpus)?,
        &idf,
        cfg.idf.edge_word_min_idf,
        cfg.index.batch_size,
    )?;
    let out = work(cfg, FALSE_POSITIVES);
    let n = write_table(&out, &pairs)?;
    m.output(&out);
    m.count("pairs", n);
    eprintln!("mine-fp: {n} false-positive pairs");
    m.finish(cfg)?;
    Ok(())
}

fn run_synthesize(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut m = RunManifest::start("synthesize");
    let paths: Vec<PathBuf> =
        [INVENTORY, RELATED, FALSE_POSITIVES, KEYS2PARAGRAPH, SKIP_SPANS].iter().map(|n| work(cfg, n)).collect();
    for p in &paths {
        m.input(p);
    }
    let inv = load_inventory(&paths[0])?;
    let pools = NegativePools::new(read_all::<RelatedPair>(&paths[1])?, read_all::<FalsePositivePair>(&paths[2])?)?;
    let synth = Synthesizer::new(&inv, &pools, cfg.strategy())?;
    let per_paragraph = cfg.synthesize.examples_per_paragraph;

    let out = work(cfg, EXAMPLES);
    let mut w = create_writer(&out)?;
    let mut skips = LineReader::open(&paths[4])?;
    let mut skip_line = 0u64;
    let (mut written, mut rejected, mut paragraphs) = (0u64, 0u64, 0u64);
    let mut batch: Vec<(ParagraphRecord, String)> = Vec::with_capacity(cfg.index.batch_size);

    let mut flush = |batch: &mut Vec<(ParagraphRecord, String)>| -> Result<(), CliError> {
        let results: Vec<Vec<biasgen_core::Result<TrainingExample>>> = batch
            .par_iter()
            .map(|(record, skip)| {
                let spans = match parse_skip_spans(skip) {
                    Ok(s) => s,
                    Err(e) => return vec![Err(e)],
                };
                (0..per_paragraph).map(|i| synth.example(record, &spans, i)).collect()
            })
            .collect();
        for r in results.into_iter().flatten() {
            match r {
                Ok(ex) => {
                    write_records(&mut w, [&ex]).map_err(|e| io_err(&out, e))?;
                    written += 1;
                }
                Err(Error::NoValidWindow) => rejected += 1,
                Err(e) => return Err(e.into()),
            }
        }
        batch.clear();
        Ok(())
    };
    for record in read_table::<ParagraphRecord>(&paths[3])? {
        let record = record?;
        paragraphs += 1;
        // Sidecar line n (0-based) belongs to paragraph id n.
        let skip = loop {
            let (_, line) = skips.next().ok_or_else(|| {
                CliError::Data(format!("{}: no skip-span line for paragraph {}", paths[4].display(), record.id))
            })??;
            skip_line += 1;
            if skip_line == record.id + 1 {
                break line;
            }
        };
        batch.push((record, skip));
        if batch.len() >= cfg.index.batch_size {
            flush(&mut batch)?;
        }
    }
    flush(&mut batch)?;
    w.flush().map_err(|e| io_err(&out, e))?;
    drop(w);
    m.output(&out);
    m.count("paragraphs", paragraphs);
    m.count("examples", written);
    m.count("rejected", rejected);
    eprintln!("synthesize: {written} examples from {paragraphs} paragraphs ({rejected} without a valid window)");
    m.finish(cfg)?;
    Ok(())
}

fn read_lines(path: &Path) -> Result<Vec<String>, CliError> {
    Ok(corpus_lines(path)?.collect::<biasgen_core::Result<_>>()?)
}

fn run_eval(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut m = RunManifest::start("eval");
    let e = &cfg.eval;
    let (rp, hp, vp) = (
        e.references.as_ref().expect("checked"),
        e.hypotheses.as_ref().expect("checked"),
        e.vocab.as_ref().expect("checked"),
    );
    for p in [rp, hp, vp] {
        m.input(p);
    }
    let refs = read_lines(rp)?;
    let hyps = read_lines(hp)?;
    if refs.len() != hyps.len() {
        return Err(Error::LengthMismatch { left: refs.len(), right: hyps.len() }.into());
    }
    let vocab: Vec<Phrase> = read_lines(vp)?
        .iter()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Phrase::new(l.trim()))
        .collect::<biasgen_core::Result<_>>()?;
    let vocab = PatternSet::new(vocab)?;
    let baseline = match &e.baseline {
        Some(b) => {
            m.input(b);
            Some(read_lines(b)?)
        }
        None => None,
    };

    let (mut wer, mut cer) = (ErrorCounts::default(), ErrorCounts::default());
    for (r, h) in refs.iter().zip(&hyps) {
        let rw: Vec<&str> = r.split_whitespace().collect();
        let hw: Vec<&str> = h.split_whitespace().collect();
        wer.add(&align(&rw, &hw).0);
        let rc: Vec<char> = r.chars().collect();
        let hc: Vec<char> = h.chars().collect();
        cer.add(&align(&rc, &hc).0);
    }
    if wer.reference_length == 0 {
        return Err(Error::EmptyReference.into());
    }
    let pr = biasing_precision_recall(&refs, &hyps, &vocab, baseline.as_deref())?;
    let mut rows = vec![
        ("sentences".to_string(), refs.len().to_string()),
        ("wer".into(), format!("{:.4}", wer.rate())),
        ("wer_substitutions".into(), wer.substitutions.to_string()),
        ("wer_insertions".into(), wer.insertions.to_string()),
        ("wer_deletions".into(), wer.deletions.to_string()),
        ("wer_reference_words".into(), wer.reference_length.to_string()),
        ("cer".into(), format!("{:.4}", cer.rate())),
        ("recall".into(), format!("{:.6}", pr.recall())),
        ("recall_undefined".into(), pr.recall_undefined().to_string()),
        ("precision".into(), format!("{:.6}", pr.precision())),
        ("precision_undefined".into(), pr.precision_undefined().to_string()),
        ("reference_occurrences".into(), pr.reference_occurrences.to_string()),
        ("hypothesis_occurrences".into(), pr.hypothesis_occurrences.to_string()),
    ];
    if let Some(b) = &baseline {
        rows.push(("recall_scope".into(), "baseline_misses".into()));
        rows.push(("changed_sentence_rate".into(), format!("{:.4}", changed_sentence_rate(b, &hyps)?)));
    } else {
        rows.push(("recall_scope".into(), "all".into()));
    }
    let out = work(cfg, METRICS);
    let body: String = rows.iter().map(|(k, v)| format!("{k}\t{v}\n")).collect();
    std::fs::write(&out, body).map_err(|e| io_err(&out, e))?;
    m.output(&out);
    m.count("sentences", refs.len() as u64);
    println!(
        "WER {:.2}%  CER {:.2}%  recall {:.3}{}  precision {:.3}{}",
        wer.rate(),
        cer.rate(),
        pr.recall(),
        if pr.recall_undefined() { " (no occurrences)" } else { "" },
        pr.precision(),
        if pr.precision_undefined() { " (no occurrences)" } else { "" },
    );
    m.finish(cfg)?;
    Ok(())
}

/// Line count of a work-directory file, `None` when absent.
fn count_lines(path: &Path) -> Result<Option<u64>, CliError> {
    if !path.is_file() {
        return Ok(None);
    }
    let mut n = 0;
    for l in LineReader::open(path)? {
        l?;
        n += 1;
    }
    Ok(Some(n))
}

fn run_stats(cfg: &PipelineConfig) -> Result<(), CliError> {
    let tables = [
        (RAW_INVENTORY, "corruption pairs before filtering"),
        (INVENTORY, "corruption pairs"),
        (NORMALIZED_CORPUS, "paragraphs"),
        (IDF, "idf rows"),
        (KEYS2PARAGRAPH, "paragraphs with keys"),
        (RELATED, "related pairs"),
        (FALSE_POSITIVES, "false-positive pairs"),
        (EXAMPLES, "training examples"),
    ];
    let mut m = RunManifest::start("stats");
    let mut out = String::new();
    for (name, what) in tables {
        if let Some(n) = count_lines(&work(cfg, name))? {
            out.push_str(&format!("{name}\t{n}\t{what}\n"));
            m.input(&work(cfg, name));
            m.count(name, n);
        }
    }
    let inv_path = work(cfg, INVENTORY);
    if inv_path.is_file() {
        let inv = load_inventory(&inv_path)?;
        out.push_str(&format!("{INVENTORY}:keys\t{}\tdistinct reference phrases\n", inv.orig_count()));
        m.count("distinct_keys", inv.orig_count() as u64);
    }
    print!("{out}");
    m.finish(cfg)?;
    Ok(())
}
