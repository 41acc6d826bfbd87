//! Plain-text run manifest: config hash, seed, per-file checksums, wall
//! clock, software version. Re-running the same configuration and seed
//! reproduces byte-identical CSVs; the manifest records what to compare.

use sha2::{Digest, Sha256};
use std::path::Path;

use crate::error::Result;

#[derive(Debug, Clone, Default)]
pub struct RunManifest {
    entries: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(config_hash: &str, seed: u64) -> Self {
        let mut m = Self::default();
        m.set("version", env!("CARGO_PKG_VERSION"));
        m.set("config_sha256", config_hash);
        m.set("master_seed", seed.to_string());
        m
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.push((key.into(), value.into()));
    }

    /// Records the checksum of an output file.
    pub fn add_file(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)?;
        let name = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        self.set(format!("sha256_{name}"), hex_digest(&bytes));
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let d = h.finalize();
    d.iter().map(|b| format!("{b:02x}")).collect()
}
