use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::ledger::io::{write_fixture, Sidecar};

use super::{SimConfig, Simulation};

/// Writes the genesis shards and the first epoch's block for `cfg` as flat
/// binary files with JSON sidecars. Returns the paths of the `.bin` files.
pub fn write_fixtures(cfg: &SimConfig, force: bool, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut sim = Simulation::new(cfg.clone(), force)?;
    let layout = sim.scheme().layout();
    let sidecar = |kind: &str, count| Sidecar::new(cfg.q, cfg.shards, cfg.slots, layout, kind, count);
    let mut written = Vec::new();
    for (k, shard) in sim.reference_shards().iter().enumerate() {
        let path = dir.join(format!("shard_{k}.bin"));
        write_fixture(&path, shard.data(), &sidecar("shard", shard.data().len()))?;
        written.push(path);
    }
    let block = sim.preview_block()?;
    let path = dir.join("block.bin");
    write_fixture(&path, block.data(), &sidecar("block", block.data().len()))?;
    written.push(path);
    Ok(written)
}
