use std::hint::black_box;

use biasgen_bench::{toy_data, TOY_DICT_ENTRIES, TOY_PAIRS, TOY_PARAGRAPHS, TOY_SEED};
use biasgen_core::align::train_alignment;
use biasgen_core::index::collect_keys2paragraph;
use biasgen_core::inventory::{compute_idf, merge_sources};
use biasgen_core::metrics::{char_error_rate, word_error_rate};
use biasgen_core::negative::mine_related;
use biasgen_core::normalize::normalize_text;
use biasgen_core::{
    CorruptionPair, NegativePools, NormalizationDict, PatternSet, Phrase, RelatedParams, SamplingStrategy, Synthesizer,
};
use criterion::{criterion_group, criterion_main, Criterion, Throughput};

fn bench_pipeline(c: &mut Criterion) {
    let data = toy_data(TOY_SEED, TOY_PARAGRAPHS, TOY_PAIRS, TOY_DICT_ENTRIES);
    let inv = merge_sources(data.sources.iter().cloned()).unwrap();
    let pairs: Vec<CorruptionPair> = data.sources.concat();
    let chars: u64 = data.paragraphs.iter().map(|p| p.chars().count() as u64).sum();

    let mut g = c.benchmark_group("corpus");
    g.throughput(Throughput::Bytes(chars));
    let matcher = PatternSet::new(inv.all_phrases()).unwrap();
    g.bench_function("scan_paragraphs", |b| {
        b.iter(|| data.paragraphs.iter().map(|p| matcher.hits(black_box(p)).len()).sum::<usize>())
    });
    let phrases = inv.all_phrases();
    g.bench_function("compute_idf", |b| b.iter(|| compute_idf(black_box(data.paragraphs.clone()), &phrases).unwrap()));
    let dict = NormalizationDict::from_rows(
        data.norm_dict.iter().map(|(w, s, f)| (w.clone(), Phrase::new(s.as_str()).unwrap(), *f)),
    )
    .unwrap();
    g.bench_function("normalize", |b| {
        b.iter(|| data.paragraphs.iter().map(|p| normalize_text(&dict, black_box(p)).text.len()).sum::<usize>())
    });
    g.finish();

    let mut g = c.benchmark_group("align");
    g.sample_size(10);
    g.bench_function("em_10_iterations_1k_pairs", |b| b.iter(|| train_alignment(black_box(&pairs), 10).unwrap()));
    g.finish();

    let origs = PatternSet::new(inv.origs().cloned()).unwrap();
    let records = collect_keys2paragraph(data.paragraphs.clone(), &origs).unwrap();
    let related = mine_related(&inv.origs().cloned().collect(), &RelatedParams::default()).unwrap();
    let pools = NegativePools::new(related, []).unwrap();
    let synth = Synthesizer::new(&inv, &pools, SamplingStrategy::default()).unwrap();
    let mut g = c.benchmark_group("synthesize");
    g.throughput(Throughput::Elements(records.len() as u64));
    g.bench_function("one_example_per_paragraph", |b| {
        b.iter(|| records.iter().filter(|r| synth.example(black_box(r), &[], 0).is_ok()).count())
    });
    g.finish();

    let refs: Vec<String> = data.paragraphs.iter().take(100).cloned().collect();
    let hyps: Vec<String> = refs.iter().map(|r| r.replacen("the", "a", 2)).collect();
    let mut g = c.benchmark_group("metrics");
    g.bench_function("wer_100_paragraphs", |b| {
        b.iter(|| refs.iter().zip(&hyps).map(|(r, h)| word_error_rate(r, h).unwrap().edits()).sum::<u64>())
    });
    g.bench_function("cer_100_paragraphs", |b| {
        b.iter(|| refs.iter().zip(&hyps).map(|(r, h)| char_error_rate(r, h).unwrap().edits()).sum::<u64>())
    });
    g.finish();
}

criterion_group!(benches, bench_pipeline);
criterion_main!(benches);
