//! `biasgen`: runs the training-data pipeline one stage at a time or end to
//! end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 I/O error.

mod config;
mod error;
mod manifest;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::PipelineConfig;
use error::CliError;
use stages::Stage;

#[derive(Parser)]
#[command(name = "biasgen", version, about = "Synthetic training data for contextual spelling correction")]
struct Cli {
    /// Pipeline config (TOML).
    #[arg(long, short, env = "BIASGEN_CONFIG", global = true)]
    config: Option<PathBuf>,
    /// Override a config value, e.g. `--set synthesize.p_correct=0.3`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Validate the config and print the plan without running anything.
    #[arg(long, global = true)]
    dry_run: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Train character translation probabilities on the corruption pairs.
    Align,
    /// Add sub-phrase pairs extracted from character alignments.
    Expand,
    /// Written-to-spoken normalization of the corpus.
    Normalize,
    /// Phrase document frequencies and common-phrase filtering.
    Idf,
    /// Find reference phrases in corpus paragraphs.
    Index,
    /// Mine related-phrase negatives.
    MineRelated,
    /// Mine false-positive negatives.
    MineFp,
    /// Generate training examples.
    Synthesize,
    /// Score hypotheses against references.
    Eval,
    /// Record counts of every table in the work directory.
    Stats,
    /// Run align through synthesize in order.
    SynthesizeAll,
}

impl Command {
    fn stages(self) -> Vec<Stage> {
        match self {
            Command::Align => vec![Stage::Align],
            Command::Expand => vec![Stage::Expand],
            Command::Normalize => vec![Stage::Normalize],
            Command::Idf => vec![Stage::Idf],
            Command::Index => vec![Stage::Index],
            Command::MineRelated => vec![Stage::MineRelated],
            Command::MineFp => vec![Stage::MineFp],
            Command::Synthesize => vec![Stage::Synthesize],
            Command::Eval => vec![Stage::Eval],
            Command::Stats => vec![Stage::Stats],
            Command::SynthesizeAll => stages::ALL.to_vec(),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli.config.ok_or_else(|| CliError::Config("no config given (use --config or BIASGEN_CONFIG)".into()))?;
    let cfg = PipelineConfig::load(&path, &cli.overrides)?;
    let stages = cli.command.stages();
    if cli.dry_run {
        // Only inputs that exist before the first stage can be checked.
        let first = stages[0];
        first.check_inputs(&cfg)?;
        for s in &stages[1..] {
            if matches!(s, Stage::Normalize | Stage::Eval) {
                s.check_inputs(&cfg)?;
            }
        }
        println!("config {} is valid; shard_count {}", path.display(), cfg.pipeline.shard_count);
        for s in &stages {
            println!("{}", s.describe(&cfg));
        }
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.pipeline.shard_count)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    for s in stages {
        s.run(&cfg)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("biasgen: {e}");
            e.exit_code()
        }
    }
}
