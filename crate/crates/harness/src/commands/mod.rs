mod eval;
mod gen_data;
mod report;
mod sim;
mod source;
mod sweep;
mod synth;

use std::fs;
use std::path::Path;

use mihbench::io::{self, FileHeader};
use serde::Serialize;

use crate::error::Result;
use crate::manifest::RunManifest;

pub use eval::{eval, ReportLine};
pub use gen_data::gen_data;
pub use report::report;
pub use sim::{resolve_sim_config, run_sim, SimConfig};
pub use sweep::{sweep, SweepRow};
pub use synth::synth;

/// Master seed when none is given.
pub const DEFAULT_SEED: u64 = 0;

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_jsonl<T: Serialize>(
    dir: &Path,
    name: &str,
    manifest: &mut RunManifest,
    items: &[T],
) -> Result<()> {
    io::save_jsonl(
        &dir.join(name),
        Some(&FileHeader::new(manifest.hash.clone())),
        items,
    )?;
    manifest.outputs.push(name.to_string());
    Ok(())
}

fn write_csv<T: Serialize>(
    dir: &Path,
    name: &str,
    manifest: &mut RunManifest,
    header: &[&str],
    rows: &[T],
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(dir.join(name))?;
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    manifest.outputs.push(name.to_string());
    Ok(())
}

/// Prints a one-line summary of a finished command on stdout.
fn announce(manifest: &RunManifest) -> Result<()> {
    let line = serde_json::json!({
        "command": manifest.command,
        "manifest": manifest.hash,
        "outputs": manifest.outputs,
    });
    println!("{line}");
    Ok(())
}
