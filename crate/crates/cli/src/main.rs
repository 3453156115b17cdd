use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod cmd;
mod config;
mod error;

use config::Config;

#[derive(Debug, Parser)]
#[command(
    name = "phseg",
    version,
    about = "Tumor/non-tumor patch classification from persistent homology profiles"
)]
struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true, env = "PHSEG_CONFIG")]
    config: Option<PathBuf>,

    /// Worker threads for per-tile parallelism (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Count border-touching complement components as holes too.
    #[arg(long, global = true)]
    literal_complement: bool,

    /// More log output; repeat for debug level.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the persistent homology profile of each tile as CSV.
    Php(cmd::php::PhpArgs),
    /// Select exemplar patches per class and store their profiles.
    Exemplars(cmd::exemplars::ExemplarArgs),
    /// Classify every tile of a manifest and render the tumor map.
    Segment(cmd::segment::SegmentArgs),
    /// Train the profile forest and the external-feature forest.
    TrainAccurate(cmd::train::TrainArgs),
    /// Score a decision CSV against a labeled manifest.
    Eval(cmd::eval::EvalArgs),
    /// Time the per-patch pipeline on a single thread.
    Bench(cmd::segment::BenchArgs),
    /// Generate a labeled synthetic H&E-like corpus.
    Synth(cmd::synth::SynthArgs),
    /// Cut a large image into tiles with a manifest.
    Tile(cmd::synth::TileArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PipelineKind {
    Fast,
    Accurate,
}

/// Model inputs shared by `segment` and `bench`.
#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = PipelineKind::Fast)]
    pipeline: PipelineKind,
    /// Exemplar set (directory or exemplars.json) for the fast pipeline.
    #[arg(long)]
    exemplars: Option<PathBuf>,
    /// Forest trained on profile vectors (accurate pipeline).
    #[arg(long)]
    php_forest: Option<PathBuf>,
    /// Forest trained on external feature vectors (accurate pipeline).
    #[arg(long)]
    feature_forest: Option<PathBuf>,
    /// External feature CSV covering every tile (accurate pipeline).
    #[arg(long)]
    features: Option<PathBuf>,
    /// Similarity constant of the fast classifier.
    #[arg(long)]
    c: Option<f64>,
    /// Number of voting exemplars.
    #[arg(long)]
    k: Option<usize>,
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    cfg.literal_complement |= cli.literal_complement;
    cfg.validate()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()?;
    pool.install(|| match cli.command {
        Command::Php(a) => cmd::php::run(a, &cfg),
        Command::Exemplars(a) => cmd::exemplars::run(a, &cfg),
        Command::Segment(a) => cmd::segment::run(a, &cfg),
        Command::TrainAccurate(a) => cmd::train::run(a, &cfg),
        Command::Eval(a) => cmd::eval::run(a),
        Command::Bench(a) => cmd::segment::bench(a, &cfg),
        Command::Synth(a) => cmd::synth::run(a, &cfg),
        Command::Tile(a) => cmd::synth::tile(a),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { error::EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    init_logging(cli.verbose);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", error::render(&e));
            ExitCode::from(error::exit_code(&e))
        }
    }
}
