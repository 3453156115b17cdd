pub mod eval;
pub mod exemplars;
pub mod php;
pub mod segment;
pub mod synth;
pub mod train;

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use phseg_core::TileManifest;

pub fn read_manifest(path: &Path) -> anyhow::Result<TileManifest> {
    TileManifest::read_csv(path).with_context(|| format!("reading manifest {}", path.display()))
}

pub fn create_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}
