// SPDX-License-Identifier: Apache-2.0

//! Run manifests. Every written artifact sits next to, or under the
//! directory of, the manifest describing the run that produced it.

use crate::error::CliError;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use wavetriage_core::mutate::sha256_hex;

#[derive(Debug, Clone, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Arguments after the program name.
    pub args: Vec<String>,
    pub config_path: Option<String>,
    /// Effective settings after flag, environment and config resolution.
    pub settings: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<InputHash>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config_path: Option<&Path>, settings: serde_json::Value) -> Self {
        RunManifest {
            tool: "wavetriage",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            config_path: config_path.map(|p| p.display().to_string()),
            settings,
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn seed(&mut self, name: &str, value: u64) -> &mut Self {
        self.seeds.insert(name.to_string(), value);
        self
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self, CliError> {
        self.inputs.push(InputHash { path: path.display().to_string(), sha256: hash_path(path)? });
        Ok(self)
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.display().to_string());
        self
    }

    /// Manifest beside a single-file artifact: `<out>.manifest.json`.
    pub fn write_beside(&self, out: &Path) -> Result<PathBuf, CliError> {
        let mut name = out.as_os_str().to_owned();
        name.push(".manifest.json");
        let p = PathBuf::from(name);
        write_json(&p, self)?;
        Ok(p)
    }

    /// Manifest for a directory of artifacts: `<dir>/run_manifest.json`.
    pub fn write_into(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let p = dir.join("run_manifest.json");
        write_json(&p, self)?;
        Ok(p)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// File hash, or for a directory the hash of its sorted `(relative path,
/// file hash)` listing.
pub fn hash_path(path: &Path) -> Result<String, CliError> {
    if path.is_dir() {
        let mut files = Vec::new();
        collect(path, path, &mut files)?;
        files.sort();
        let mut listing = String::new();
        for rel in files {
            let h = hash_path(&path.join(&rel))?;
            listing.push_str(&format!("{}\t{h}\n", rel.display()));
        }
        Ok(sha256_hex(listing.as_bytes()))
    } else {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        Ok(sha256_hex(&bytes))
    }
}

fn collect(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), CliError> {
    for entry in std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let p = entry.map_err(|e| CliError::io(dir, e))?.path();
        if p.is_dir() {
            collect(root, &p, out)?;
        } else {
            out.push(p.strip_prefix(root).unwrap_or(&p).to_path_buf());
        }
    }
    Ok(())
}
