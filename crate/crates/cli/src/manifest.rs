//! Run manifests: every invocation records its command line, map hash,
//! tolerances, seed, versions, wall time and the digests of everything it
//! wrote, so a run can be checked for bitwise reproducibility.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub map_hash: String,
    pub tolerances: serde_json::Value,
    pub seed: u64,
    pub versions: BTreeMap<String, String>,
    pub wall_time_ms: u128,
    /// filename -> sha256 of the bytes written.
    pub outputs: BTreeMap<String, String>,
}

/// Collects output files in memory and writes them (plus the manifest)
/// in one pass, strictly inside the designated directory.
pub struct OutputSet {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Self {
        OutputSet {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        assert!(
            !name.contains('/') && !name.contains('\\'),
            "output names must be bare filenames"
        );
        self.files.push((name.to_string(), bytes));
    }

    pub fn digests(&self) -> BTreeMap<String, String> {
        self.files
            .iter()
            .map(|(name, bytes)| {
                let mut hasher = Sha256::new();
                hasher.update(bytes);
                let digest = hasher.finalize();
                (
                    name.clone(),
                    digest.iter().map(|b| format!("{b:02x}")).collect(),
                )
            })
            .collect()
    }

    pub fn write_all(self, manifest: &mut RunManifest) -> std::io::Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        manifest.outputs = self.digests();
        for (name, bytes) in &self.files {
            std::fs::write(self.dir.join(name), bytes)?;
        }
        let manifest_bytes = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
        std::fs::write(self.dir.join("manifest.json"), manifest_bytes)?;
        Ok(())
    }
}
