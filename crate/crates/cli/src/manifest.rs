//! Run manifests: what a command read, how it was configured and what it
//! wrote, with SHA-256 hashes. A manifest names the manifests of its input
//! artifacts by hash, so synth, train and eval runs form a verifiable chain.
//! Manifests hold no timestamps or absolute paths, so identical inputs give
//! identical manifests.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub role: String,
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub inputs: Vec<Artifact>,
    /// Hashes of the manifests that produced the inputs.
    pub parents: Vec<String>,
    pub outputs: Vec<Artifact>,
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(sha256_bytes(&bytes))
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

impl Manifest {
    pub fn new(command: &str, seed: Option<u64>, config: impl Serialize) -> Result<Self> {
        let config = serde_json::to_value(config).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config,
            inputs: Vec::new(),
            parents: Vec::new(),
            outputs: Vec::new(),
        })
    }

    /// Records an input file and, if its directory holds a manifest, links it
    /// as a parent.
    pub fn input(&mut self, role: &str, path: &Path) -> Result<()> {
        self.inputs.push(Artifact { role: role.into(), file: file_name(path), sha256: sha256_file(path)? });
        let dir = path.parent().unwrap_or(Path::new("."));
        let parent = dir.join(MANIFEST_FILE);
        if parent.is_file() {
            let hash = sha256_file(&parent)?;
            if !self.parents.contains(&hash) {
                self.parents.push(hash);
            }
        } else {
            log::warn!("{} has no {MANIFEST_FILE}; provenance chain is broken", dir.display());
        }
        Ok(())
    }

    pub fn output(&mut self, role: &str, path: &Path) -> Result<()> {
        self.outputs.push(Artifact { role: role.into(), file: file_name(path), sha256: sha256_file(path)? });
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s.into_bytes()
    }

    /// Writes `manifest.json` into `dir` and returns its path and hash.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, String)> {
        let path = dir.join(MANIFEST_FILE);
        let bytes = self.to_bytes();
        std::fs::write(&path, &bytes).map_err(|e| CliError::io(&path, e))?;
        Ok((path, sha256_bytes(&bytes)))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_path_buf(), source })
    }
}
