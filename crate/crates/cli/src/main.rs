mod commands;
mod config;
mod error;
mod serve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use linematch::corpus::Format;
use linematch::eval::EncoderSpec;

use crate::config::RunConfig;
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "linematch", version, about = "Match invoice line items to purchase-order lines")]
struct Cli {
    /// TOML or JSON run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Read, normalize and deduplicate a corpus and report its 2:1 split.
    Ingest(IngestArgs),
    /// Generate preference triples from a corpus or synthetic products.
    GenTriples(GenTriplesArgs),
    /// Learning curve of the online ranker against the cosine baseline.
    TrainEval(TrainEvalArgs),
    /// Final trained precision per dataset and encoder.
    Compare(CompareArgs),
    /// Taxonomy-aware Jaccard scores between invoice and PO items.
    Taxmatch(TaxmatchArgs),
    /// Run the feedback service over a PO pool.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Jsonl,
    Csv,
    Tsv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Jsonl => Format::Jsonl,
            FormatArg::Csv => Format::Csv,
            FormatArg::Tsv => Format::Tsv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Recipe {
    Invoice,
    Product,
    Sentence,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Corpus file (JSONL, CSV or TSV).
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Write the deduplicated records here as JSONL.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Split seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Print the JSON report instead of the summary.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct GenTriplesArgs {
    /// Corpus file; one triple per record.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Generate this many synthetic product descriptions instead of reading
    /// a corpus.
    #[arg(long, conflicts_with = "input")]
    pub synthetic: Option<usize>,
    #[arg(long, value_enum, default_value = "invoice")]
    pub recipe: Recipe,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Brand word list, one per line (product recipe).
    #[arg(long)]
    pub brands: Option<PathBuf>,
    /// Product noun list, one per line (product recipe).
    #[arg(long)]
    pub products: Option<PathBuf>,
    /// Antonym pairs, one `a b` per line.
    #[arg(long)]
    pub antonyms: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Aggressiveness of the passive-aggressive update.
    #[arg(long)]
    pub c: Option<f64>,
    /// `exact`, `hashed` or `hashed:<dim>`.
    #[arg(long, value_parser = config::parse_encoder)]
    pub encoder: Option<EncoderSpec>,
    /// Encode raw strings without lexical normalization.
    #[arg(long)]
    pub no_normalize: bool,
}

#[derive(Debug, Args)]
pub struct TrainEvalArgs {
    /// Triples file (JSONL).
    #[arg(long, short)]
    pub triples: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub permutations: Option<usize>,
    /// Comma-separated sample counts.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Option<Vec<usize>>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also write the curve as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Triples files; repeat for several datasets.
    #[arg(long, short, required = true)]
    pub triples: Vec<PathBuf>,
    /// Comma-separated encoders.
    #[arg(long, value_delimiter = ',', value_parser = config::parse_encoder, default_value = "exact,hashed")]
    pub encoders: Vec<EncoderSpec>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct TaxmatchArgs {
    /// Taxonomy JSON: `{"nodes": [{"name": ..., "parents": [...]}]}`.
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    /// Product catalog JSON with attributes per product node.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Invoice line text.
    #[arg(long, requires = "po", conflicts_with = "items")]
    pub invoice: Option<String>,
    /// PO line text; repeat for several lines.
    #[arg(long)]
    pub po: Vec<String>,
    /// JSONL of `{"invoice": ..., "po": [...]}` objects.
    #[arg(long)]
    pub items: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// PO pool file (JSONL, CSV or TSV records).
    #[arg(long)]
    pub pool: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Event log and snapshots; state is restored from here on start.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Candidates retrieved per query.
    #[arg(long)]
    pub k: Option<usize>,
    /// Aggressiveness of the passive-aggressive updates.
    #[arg(long)]
    pub c: Option<f64>,
    /// Keep a model snapshot every this many versions.
    #[arg(long)]
    pub snapshot_every: Option<u64>,
    /// Train the classifier on accepted pairs as matches.
    #[arg(long)]
    pub accept_as_positive: bool,
}

fn run(cli: Cli) -> Result<()> {
    let cfg = RunConfig::load_or_default(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest(a) => commands::ingest(cfg, a),
        Command::GenTriples(a) => commands::gen_triples(cfg, a),
        Command::TrainEval(a) => commands::train_eval(cfg, a),
        Command::Compare(a) => commands::compare(cfg, a),
        Command::Taxmatch(a) => commands::taxmatch(cfg, a),
        Command::Serve(a) => serve::serve(cfg, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => ExitCode::from(3),
    }
}
