use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use biasgen_bench::{norm_dict_tsv, toy_data};
use biasgen_core::corpus::write_table;

const CONFIG: &str = r#"
[pipeline]
work_dir = "work"
shard_count = 2
rng_seed = 5

[inputs]
corruptions = ["asr_a.tsv", "asr_b.tsv"]
corpus = "corpus.txt"
norm_dict = "norm_dict.tsv"

[synthesize]
examples_per_paragraph = 2
"#;

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let data = toy_data(11, 80, 300, 60);
        write_table(dir.path().join("asr_a.tsv"), &data.sources[0]).unwrap();
        write_table(dir.path().join("asr_b.tsv"), &data.sources[1]).unwrap();
        std::fs::write(dir.path().join("corpus.txt"), data.paragraphs.join("\n") + "\n").unwrap();
        std::fs::write(dir.path().join("norm_dict.tsv"), norm_dict_tsv(&data.norm_dict)).unwrap();
        std::fs::write(dir.path().join("pipeline.toml"), CONFIG).unwrap();
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_biasgen"))
            .arg("--config")
            .arg(self.path("pipeline.toml"))
            .args(args)
            .output()
            .unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn newline_count(p: &Path) -> u64 {
    std::fs::read(p).unwrap().iter().filter(|&&b| b == b'\n').count() as u64
}

#[test]
fn stats_match_line_counts() {
    let f = Fixture::new();
    let o = f.run(&["synthesize-all"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = f.run(&["stats"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut tables = 0;
    for line in text.lines() {
        let cols: Vec<&str> = line.split('\t').collect();
        assert_eq!(cols.len(), 3, "{line}");
        if cols[0].contains(':') {
            continue;
        }
        assert_eq!(cols[1].parse::<u64>().unwrap(), newline_count(&f.path("work").join(cols[0])), "{line}");
        tables += 1;
    }
    assert_eq!(tables, 8, "{text}");
    assert!(f.path("work/manifests/stats.manifest").is_file());
}

#[test]
fn stage_reruns_are_identical_and_shard_independent() {
    let f = Fixture::new();
    assert_eq!(code(&f.run(&["synthesize-all"])), 0);
    let first = std::fs::read(f.path("work/examples.tsv")).unwrap();
    assert!(!first.is_empty());
    assert_eq!(code(&f.run(&["synthesize"])), 0);
    assert_eq!(std::fs::read(f.path("work/examples.tsv")).unwrap(), first);

    let o = f.run(&["--set", "pipeline.shard_count=1", "--set", "pipeline.work_dir=single", "synthesize-all"]);
    assert_eq!(code(&o), 0);
    for name in ["keys2corruptions.tsv", "keys2paragraph.tsv", "falsepositives.tsv", "examples.tsv"] {
        assert_eq!(
            std::fs::read(f.path("single").join(name)).unwrap(),
            std::fs::read(f.path("work").join(name)).unwrap(),
            "{name}"
        );
    }

    let o = f.run(&["--set", "synthesize.rng_seed=6", "synthesize"]);
    assert_eq!(code(&o), 2, "unknown keys are rejected");
    let o = f.run(&["--set", "pipeline.rng_seed=6", "synthesize"]);
    assert_eq!(code(&o), 0);
    assert_ne!(std::fs::read(f.path("work/examples.tsv")).unwrap(), first);
}

#[test]
fn manifests_record_digests_and_config() {
    let f = Fixture::new();
    assert_eq!(code(&f.run(&["align"])), 0);
    let m = std::fs::read_to_string(f.path("work/manifests/align.manifest")).unwrap();
    assert!(m.starts_with("stage=align\n"));
    for key in [
        "tool_version=",
        "config.align.iterations=",
        "config.pipeline.rng_seed=5",
        "output.translation_table.tsv=sha256:",
        "wall_clock_ms=",
    ] {
        assert!(m.contains(key), "{key} missing from\n{m}");
    }
    assert_eq!(m.matches("=sha256:").count(), 3);
}

#[test]
fn dry_run_writes_nothing() {
    let f = Fixture::new();
    let o = f.run(&["--dry-run", "synthesize-all"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    for stage in ["align", "expand", "normalize", "idf", "index", "mine-related", "mine-fp", "synthesize"] {
        assert!(text.lines().any(|l| l.starts_with(&format!("{stage}: "))), "{stage} missing from\n{text}");
    }
    assert!(!f.path("work").exists());
}

#[test]
fn config_from_environment() {
    let f = Fixture::new();
    let o = Command::new(env!("CARGO_BIN_EXE_biasgen"))
        .env("BIASGEN_CONFIG", f.path("pipeline.toml"))
        .args(["--dry-run", "align"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let o = Command::new(env!("CARGO_BIN_EXE_biasgen")).env_remove("BIASGEN_CONFIG").arg("align").output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn exit_codes() {
    let f = Fixture::new();
    assert_eq!(code(&f.run(&["--set", "synthesize.p_correct=2", "synthesize"])), 2);
    assert_eq!(code(&f.run(&["--set", "pipeline.shard_count=0", "stats"])), 2);
    assert_eq!(code(&f.run(&["--set", "inputs.corpus=missing.txt", "normalize"])), 2);
    std::fs::write(f.path("bad.toml"), "[pipeline\nwork_dir = 1").unwrap();
    let o =
        Command::new(env!("CARGO_BIN_EXE_biasgen")).arg("-c").arg(f.path("bad.toml")).arg("stats").output().unwrap();
    assert_eq!(code(&o), 2);

    // A downstream stage whose upstream output was never written.
    assert_eq!(code(&f.run(&["expand"])), 4);

    std::fs::write(f.path("asr_a.tsv"), "congo\tcondo\tnine\tasr_a\n").unwrap();
    let o = f.run(&["align"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn eval_reports_metrics() {
    let f = Fixture::new();
    std::fs::write(f.path("refs.txt"), "mbesa is a bantu language\nthe republic of the congo\n").unwrap();
    std::fs::write(f.path("hyps.txt"), "mbesa is a bantu language\nthe republic of the condo\n").unwrap();
    std::fs::write(f.path("base.txt"), "embassa is a band to language\nthe republic of the condo\n").unwrap();
    std::fs::write(f.path("vocab.txt"), "mbesa\nbantu\nrepublic of the congo\n").unwrap();
    let o = f.run(&[
        "--set",
        "eval.references=refs.txt",
        "--set",
        "eval.hypotheses=hyps.txt",
        "--set",
        "eval.baseline=base.txt",
        "--set",
        "eval.vocab=vocab.txt",
        "eval",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = std::fs::read_to_string(f.path("work/metrics.tsv")).unwrap();
    let get = |k: &str| m.lines().find_map(|l| l.strip_prefix(&format!("{k}\t"))).unwrap().to_string();
    assert_eq!(get("wer_substitutions"), "1");
    assert_eq!(get("wer_reference_words"), "10");
    assert_eq!(get("wer"), "10.0000");
    // Both baseline misses in the first sentence are fixed; the congo one
    // in the second is not.
    assert_eq!(get("recall"), "0.666667");
    assert_eq!(get("precision"), "1.000000");
    assert_eq!(get("changed_sentence_rate"), "50.0000");

    std::fs::write(f.path("hyps.txt"), "only one line\n").unwrap();
    let o = f.run(&[
        "--set",
        "eval.references=refs.txt",
        "--set",
        "eval.hypotheses=hyps.txt",
        "--set",
        "eval.vocab=vocab.txt",
        "eval",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn every_written_example_validates() {
    let f = Fixture::new();
    assert_eq!(code(&f.run(&["synthesize-all"])), 0);
    let examples: Vec<biasgen_core::TrainingExample> = biasgen_core::corpus::read_table(f.path("work/examples.tsv"))
        .unwrap()
        .collect::<biasgen_core::Result<_>>()
        .unwrap();
    assert!(examples.len() > 50);
    for ex in &examples {
        ex.validate().unwrap();
    }
}
