// SPDX-License-Identifier: Apache-2.0

//! Declaration scanner for Verilog/SystemVerilog and the module lookup table
//! built from it: module -> declared type -> variable names, plus the
//! instances each module creates.

pub mod lex;
mod scan;

pub use scan::{scan_text, ScannedDecl, ScannedInstance, ScannedModule};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RtlError {
    #[error("{file}:{line}: parse error, expected {expected}")]
    Parse { file: String, line: u32, expected: String },
    #[error("module `{0}` is declared more than once")]
    DuplicateModule(String),
    #[error("unknown module `{0}`")]
    UnknownModule(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Ordered `(path, text)` pairs.
#[derive(Debug, Clone, Default)]
pub struct DesignSources {
    pub files: Vec<(PathBuf, String)>,
}

impl DesignSources {
    /// Every `.v`/`.sv` file under `dir`, in sorted path order. Paths are kept
    /// relative to `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, RtlError> {
        let mut paths = Vec::new();
        collect_sources(dir, dir, &mut paths)?;
        paths.sort();
        let mut files = Vec::with_capacity(paths.len());
        for rel in paths {
            let full = dir.join(&rel);
            let text = std::fs::read_to_string(&full).map_err(|source| RtlError::Io { path: full, source })?;
            files.push((rel, text));
        }
        Ok(DesignSources { files })
    }
}

fn collect_sources(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), RtlError> {
    let io = |source| RtlError::Io { path: dir.to_path_buf(), source };
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.is_dir() {
            collect_sources(root, &path, out)?;
        } else if matches!(path.extension().and_then(|e| e.to_str()), Some("v" | "sv")) {
            out.push(path.strip_prefix(root).unwrap_or(&path).to_path_buf());
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Instance {
    pub module: String,
    pub name: String,
}

/// The lookup table τ. Every variable name appears under exactly one type
/// within its module.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleLookupTable {
    pub modules: BTreeMap<String, BTreeMap<String, BTreeSet<String>>>,
    pub instances: BTreeMap<String, Vec<Instance>>,
    /// Source file of each module, as given in [`DesignSources`].
    pub files: BTreeMap<String, PathBuf>,
}

impl ModuleLookupTable {
    /// All variable names of `module`.
    pub fn vars(&self, module: &str) -> Option<BTreeSet<String>> {
        self.modules.get(module).map(|types| types.values().flatten().cloned().collect())
    }

    /// Declared type of `name` in `module`.
    pub fn type_of(&self, module: &str, name: &str) -> Option<&str> {
        self.modules.get(module)?.iter().find(|(_, names)| names.contains(name)).map(|(ty, _)| ty.as_str())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("lookup table serializes")
    }

    /// Modules never instantiated by another scanned module.
    pub fn roots(&self) -> Vec<&str> {
        let children: BTreeSet<&str> = self.instances.values().flatten().map(|i| i.module.as_str()).collect();
        self.modules.keys().map(String::as_str).filter(|m| !children.contains(m)).collect()
    }

    fn insert(&mut self, file: &Path, m: ScannedModule) -> Result<(), RtlError> {
        if self.modules.contains_key(&m.name) {
            return Err(RtlError::DuplicateModule(m.name));
        }
        let mut types: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for d in m.decls {
            types.entry(d.decl_type).or_default().insert(d.name);
        }
        self.instances.insert(m.name.clone(), m.instances.into_iter().map(|i| Instance { module: i.module, name: i.name }).collect());
        self.files.insert(m.name.clone(), file.to_path_buf());
        self.modules.insert(m.name, types);
        Ok(())
    }
}

/// Scan every file (in parallel) and merge in file order.
pub fn scan_sources(sources: &DesignSources) -> Result<ModuleLookupTable, RtlError> {
    let scanned: Vec<Result<Vec<ScannedModule>, RtlError>> =
        sources.files.par_iter().map(|(path, text)| scan_text(&path.display().to_string(), text)).collect();
    let mut table = ModuleLookupTable::default();
    for ((path, _), modules) in sources.files.iter().zip(scanned) {
        for m in modules? {
            table.insert(path, m)?;
        }
    }
    Ok(table)
}

/// Each target's own variable names. Children contribute only under their
/// own target entry, so labels stay per module.
pub fn signals_for_targets(
    table: &ModuleLookupTable,
    targets: &BTreeSet<String>,
) -> Result<BTreeMap<String, BTreeSet<String>>, RtlError> {
    targets
        .iter()
        .map(|t| table.vars(t).map(|v| (t.clone(), v)).ok_or_else(|| RtlError::UnknownModule(t.clone())))
        .collect()
}
