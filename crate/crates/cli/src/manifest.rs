//! Run manifests: every command writes exactly one `manifest.json` next to
//! its outputs, recording the resolved configuration, seed, file paths,
//! timestamps, and SHA-256 hashes of everything it produced.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

#[derive(Debug, serde::Serialize)]
pub struct RunManifest {
    pub command: String,
    pub resolved_config: serde_json::Value,
    pub seed: u64,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub checkpoint_path: Option<String>,
    pub started_at: String,
    pub finished_at: String,
    pub artifact_hashes: BTreeMap<String, String>,
}

pub struct ManifestBuilder {
    command: String,
    resolved_config: serde_json::Value,
    seed: u64,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    checkpoint: Option<PathBuf>,
    started_at: String,
}

impl ManifestBuilder {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            resolved_config: serde_json::Value::Null,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            checkpoint: None,
            started_at: chrono::Utc::now().to_rfc3339(),
        }
    }

    pub fn config<T: serde::Serialize>(mut self, cfg: &T) -> Self {
        self.resolved_config = serde_json::to_value(cfg).unwrap_or(serde_json::Value::Null);
        self
    }

    pub fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.to_path_buf());
        self
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.to_path_buf());
        self
    }

    pub fn checkpoint(mut self, path: &Path) -> Self {
        self.checkpoint = Some(path.to_path_buf());
        self.outputs.push(path.to_path_buf());
        self
    }

    /// Hash all outputs and write `manifest.json` into `dir`.
    pub fn write(self, dir: &Path) -> Result<()> {
        let mut artifact_hashes = BTreeMap::new();
        for path in &self.outputs {
            let bytes = std::fs::read(path)
                .with_context(|| format!("hashing output {}", path.display()))?;
            artifact_hashes.insert(
                path.display().to_string(),
                format!("{:x}", Sha256::digest(&bytes)),
            );
        }
        let manifest = RunManifest {
            command: self.command,
            resolved_config: self.resolved_config,
            seed: self.seed,
            inputs: self
                .inputs
                .iter()
                .map(|p| p.display().to_string())
                .collect(),
            outputs: self
                .outputs
                .iter()
                .map(|p| p.display().to_string())
                .collect(),
            checkpoint_path: self.checkpoint.map(|p| p.display().to_string()),
            started_at: self.started_at,
            finished_at: chrono::Utc::now().to_rfc3339(),
            artifact_hashes,
        };
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
