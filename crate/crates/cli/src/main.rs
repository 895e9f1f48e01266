//! `sindex`: score sets of sampled LLM answers for semantic inconsistency.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sindex_core::{Algorithm, Measure};

#[derive(Parser, Debug)]
#[command(
    name = "sindex",
    version,
    about = "Embedding-cluster hallucination scoring"
)]
struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fill the embedding cache for every string a dataset needs.
    Embed {
        dataset: PathBuf,
        #[command(flatten)]
        embed: EmbedArgs,
    },
    /// Print the partition and merge trace for one question.
    Cluster {
        dataset: PathBuf,
        #[arg(long)]
        id: String,
        #[command(flatten)]
        cluster: ClusterArgs,
        #[command(flatten)]
        embed: EmbedArgs,
    },
    /// Per-question scores as JSON lines.
    Score {
        dataset: PathBuf,
        #[arg(long, value_delimiter = ',')]
        measures: Option<Vec<Measure>>,
        #[command(flatten)]
        cluster: ClusterArgs,
        #[command(flatten)]
        embed: EmbedArgs,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Scores plus ground-truth labels as JSON lines, ready for `eval`.
    Label {
        dataset: PathBuf,
        #[command(flatten)]
        label: LabelArgs,
        #[arg(long, value_delimiter = ',')]
        measures: Option<Vec<Measure>>,
        #[command(flatten)]
        cluster: ClusterArgs,
        #[command(flatten)]
        embed: EmbedArgs,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// AUROC of each measure over labeled records.
    Eval {
        records: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// AUROC as one setting varies.
    Ablate {
        dataset: PathBuf,
        #[arg(long, value_enum)]
        sweep: Sweep,
        /// Comma-separated sweep values (similarity cutoffs or P values).
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        measures: Option<Vec<Measure>>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[command(flatten)]
        label: LabelArgs,
        #[command(flatten)]
        cluster: ClusterArgs,
        #[command(flatten)]
        embed: EmbedArgs,
    },
    /// Time clustering on random unit vectors; CSV on stdout.
    Bench {
        #[arg(long, default_value_t = 200)]
        max_p: usize,
        #[arg(long, default_value_t = 384)]
        dim: usize,
        #[arg(long, default_value_t = 5)]
        repetitions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-call latency charged to the NLI mock.
        #[arg(long, default_value_t = 10)]
        mock_nli_latency_ms: u64,
        /// Really sleep for the mock latency instead of adding it.
        #[arg(long)]
        mock_nli_sleep: bool,
        #[arg(long, conflicts_with_all = ["mock_nli_sleep"])]
        no_mock_nli: bool,
    },
    /// Write a seeded synthetic corpus with planted labels.
    Synth {
        #[arg(long, default_value_t = 200)]
        questions: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 10)]
        generations: usize,
        #[arg(long, default_value_t = 128)]
        dim: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Default)]
struct EmbedArgs {
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Use at most this many answers per question.
    #[arg(long)]
    generations: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct ClusterArgs {
    #[arg(long)]
    algo: Option<Algorithm>,
    /// Cosine distance threshold.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct LabelArgs {
    #[arg(long)]
    label_threshold: Option<f64>,
    #[arg(long, value_enum)]
    policy: Option<Policy>,
    /// Response index used by `--policy low-temp-reference`.
    #[arg(long, default_value_t = 0)]
    reference_index: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Sweep {
    Threshold,
    Generations,
    Algorithm,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Policy {
    Majority,
    LowTempReference,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.message.replace(['\n', '\r'], " ");
            eprintln!("sindex-error: {}: {}", e.kind, msg);
            ExitCode::FAILURE
        }
    }
}
