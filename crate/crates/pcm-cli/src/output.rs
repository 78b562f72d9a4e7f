//! Deterministic CSV and manifest emission.
//!
//! CSV files use a comma separator, '.' decimal point, one header row,
//! nine significant digits, and LF line endings; identical inputs produce
//! byte-identical files.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Nine-significant-digit scientific form, the one float format used in
/// every CSV column.
pub fn g9(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.8e}")
    }
}

pub struct CsvWriter {
    path: PathBuf,
    buf: String,
}

impl CsvWriter {
    pub fn new(path: PathBuf, header: &str) -> Self {
        let mut buf = String::new();
        buf.push_str(header);
        buf.push('\n');
        CsvWriter { path, buf }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self) -> Result<PathBuf> {
        std::fs::write(&self.path, self.buf.as_bytes())
            .with_context(|| format!("cannot write {}", self.path.display()))?;
        Ok(self.path)
    }
}

/// Run manifest: tool identity, inputs digest, evaluation mode, outputs.
/// Contains nothing volatile so reruns stay byte-stable.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Evaluation mode behind the outputs (field solver or sheet model).
    pub mode: String,
    pub config_hash: String,
    /// Digest of the solved geometry + solver configuration (the cache key).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve_key: Option<String>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver_stats: Option<pcm_core::SolveStats>,
}

impl Manifest {
    pub fn new(
        command: &str,
        mode: &str,
        config_hash: String,
        seed: u64,
        threads: Option<usize>,
    ) -> Self {
        Manifest {
            tool: "pcm",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            mode: mode.into(),
            config_hash,
            solve_key: None,
            seed,
            threads,
            outputs: Vec::new(),
            warnings: Vec::new(),
            solver_stats: None,
        }
    }

    pub fn record_output(&mut self, path: &Path) {
        if let Some(name) = path.file_name() {
            self.outputs.push(name.to_string_lossy().into_owned());
        }
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}

/// SHA-256 hex digest of a config file's bytes.
pub fn config_hash(path: &Path) -> Result<String> {
    use sha2::{Digest, Sha256};
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hex::encode(hasher.finalize()))
}
