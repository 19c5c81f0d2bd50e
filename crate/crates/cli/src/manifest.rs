//! `manifest.json` written next to every command's outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const FILE_NAME: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<InputDigest>,
    pub seed: Option<u64>,
    pub workers: usize,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
}

/// Wall-clock time, pinned by `SOURCE_DATE_EPOCH` when set so that reruns
/// produce identical manifests.
pub fn timestamp() -> String {
    let pinned = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::<Utc>::from_timestamp(secs, 0));
    pinned
        .unwrap_or_else(Utc::now)
        .to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub struct ManifestBuilder {
    manifest: RunManifest,
    out_dir: PathBuf,
}

impl ManifestBuilder {
    pub fn new(command: &str, out_dir: &Path, seed: Option<u64>, workers: usize) -> Self {
        Self {
            manifest: RunManifest {
                command: command.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                config: BTreeMap::new(),
                inputs: Vec::new(),
                seed,
                workers,
                started: timestamp(),
                finished: String::new(),
                outputs: Vec::new(),
            },
            out_dir: out_dir.to_path_buf(),
        }
    }

    pub fn config(&mut self, key: impl Into<String>, value: impl ToString) {
        self.manifest.config.insert(key.into(), value.to_string());
    }

    pub fn config_all(&mut self, entries: BTreeMap<String, String>) {
        self.manifest.config.extend(entries);
    }

    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        let sha256 = sha256_file(path)?;
        self.manifest.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256,
        });
        Ok(())
    }

    pub fn output(&mut self, name: &str) {
        self.manifest.outputs.push(name.to_string());
    }

    pub fn write(mut self) -> Result<(), CliError> {
        self.manifest.finished = timestamp();
        self.manifest.outputs.sort();
        let text = serde_json::to_string_pretty(&self.manifest).map_err(CliError::internal)?;
        fs::write(self.out_dir.join(FILE_NAME), text + "\n")
            .map_err(|e| CliError::internal(format!("writing manifest: {e}")))
    }
}
