//! `manifest.json`: what produced a directory of artifacts. It holds no
//! timestamps or host details, so reruns are byte-identical.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct Artifact {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// SHA-256 of the effective configuration (after overrides) in
    /// canonical TOML form.
    pub config_sha256: String,
    pub seed: u64,
    pub noise_level: f64,
    pub artifacts: Vec<Artifact>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Manifest {
    pub fn new(command: impl Into<String>, config_text: &str, seed: u64, noise_level: f64) -> Self {
        Self {
            tool: "helmsrc",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            config_sha256: sha256_hex(config_text.as_bytes()),
            seed,
            noise_level,
            artifacts: Vec::new(),
        }
    }

    /// Records files (given relative to `dir`) in the order listed.
    pub fn record(&mut self, dir: &Path, files: &[PathBuf]) -> CliResult<()> {
        for f in files {
            let full = dir.join(f);
            let bytes = std::fs::read(&full).map_err(|e| CliError::io(&full, e))?;
            self.artifacts.push(Artifact {
                path: f.to_string_lossy().replace('\\', "/"),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(&bytes),
            });
        }
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join(MANIFEST_NAME);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}
