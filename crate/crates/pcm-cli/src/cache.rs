//! Content-addressed cache for solved reflection spectra.
//!
//! The key is a SHA-256 over the canonical JSON of the cell geometry and
//! solver configuration (serde_json emits object keys in sorted order, so
//! the serialization is canonical). Entries are whole `UnitCellSolve`
//! values; JSON float round-tripping is exact, so a hit reproduces the
//! fresh solve bit for bit. Writes go through a temporary file and an
//! atomic rename; unreadable entries are evicted and recomputed.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

use pcm_core::{run_unit_cell, SolverConfig, UnitCellGeometry, UnitCellSolve};

pub fn solve_key(cell: &UnitCellGeometry, config: &SolverConfig) -> Result<String> {
    let canonical = serde_json::to_string(&serde_json::json!({
        "cell": cell,
        "solver": config,
    }))?;
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    Ok(hex::encode(hasher.finalize()))
}

fn entry_path(cache_dir: &Path, key: &str) -> PathBuf {
    cache_dir.join(format!("{key}.json"))
}

fn load_entry(path: &Path) -> Option<UnitCellSolve> {
    let text = std::fs::read_to_string(path).ok()?;
    let solve: UnitCellSolve = serde_json::from_str(&text).ok()?;
    // Guard against entries that parse but violate spectrum invariants.
    let freqs: Vec<f64> = solve.spectrum.freqs_ghz().collect();
    if freqs.windows(2).any(|w| w[1] <= w[0]) {
        return None;
    }
    Some(solve)
}

fn store_entry(path: &Path, solve: &UnitCellSolve) -> Result<()> {
    let dir = path.parent().expect("cache entry has a parent directory");
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().unwrap().to_string_lossy(),
        std::process::id()
    ));
    std::fs::write(&tmp, serde_json::to_string(solve)?)
        .with_context(|| format!("cannot write cache entry {}", tmp.display()))?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Solves the cell, consulting the cache first. Returns the solve and
/// whether it was served from the cache.
pub fn solve_cached(
    cell: &UnitCellGeometry,
    config: &SolverConfig,
    cache_dir: Option<&Path>,
) -> Result<(UnitCellSolve, bool)> {
    let Some(dir) = cache_dir else {
        return Ok((run_unit_cell(cell, config)?, false));
    };
    let key = solve_key(cell, config)?;
    let path = entry_path(dir, &key);
    if path.exists() {
        match load_entry(&path) {
            Some(solve) => return Ok((solve, true)),
            None => {
                // Corrupt entry: evict and fall through to a fresh solve.
                let _ = std::fs::remove_file(&path);
            }
        }
    }
    let solve = run_unit_cell(cell, config)?;
    store_entry(&path, &solve)?;
    Ok((solve, false))
}
