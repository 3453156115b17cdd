use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use phseg_core::metrics::evaluate;
use phseg_core::segmenter::read_decisions;

use super::{emit, read_manifest};

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Decision CSV written by `segment`.
    #[arg(long)]
    decisions: PathBuf,
    /// Manifest with a label for every decided tile.
    #[arg(long)]
    truth: PathBuf,
    /// Write the metrics JSON here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

pub fn run(args: EvalArgs) -> anyhow::Result<()> {
    let decisions = read_decisions(&args.decisions)
        .with_context(|| format!("reading decisions {}", args.decisions.display()))?;
    let truth = read_manifest(&args.truth)?;
    let report = evaluate(&decisions, &truth)?;
    emit(args.out.as_ref(), &serde_json::to_string_pretty(&report)?)
}
