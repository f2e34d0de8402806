// SPDX-License-Identifier: Apache-2.0

//! Append-only JSONL stores: accepted mutations and rejected sites.

use super::plan::{MutationSpec, SiteKey};
use super::MutateError;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

/// Sites rejected this many times are no longer planned.
pub const EXCLUDE_AFTER: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub scenario_id: String,
    pub module: String,
    pub specs: Vec<MutationSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureEntry {
    pub scenario_id: String,
    pub site: SiteKey,
    pub reason: String,
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, MutateError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => return Err(MutateError::Io { path: path.to_path_buf(), source }),
    };
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| MutateError::Store { path: path.to_path_buf(), msg: e.to_string() }))
        .collect()
}

fn append_jsonl<T: Serialize>(path: Option<&Path>, item: &T) -> Result<(), MutateError> {
    let Some(path) = path else { return Ok(()) };
    let mut line = serde_json::to_string(item).expect("entry serializes");
    line.push('\n');
    let io = |source| MutateError::Io { path: path.to_path_buf(), source };
    let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
    f.write_all(line.as_bytes()).map_err(io)
}

/// Accepted scenarios keyed by id. Later entries win.
#[derive(Debug, Default)]
pub struct MutationCache {
    path: Option<PathBuf>,
    entries: Mutex<BTreeMap<String, CacheEntry>>,
}

impl MutationCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn open(path: &Path) -> Result<Self, MutateError> {
        let entries = read_jsonl::<CacheEntry>(path)?.into_iter().map(|e| (e.scenario_id.clone(), e)).collect();
        Ok(MutationCache { path: Some(path.to_path_buf()), entries: Mutex::new(entries) })
    }

    pub fn get(&self, scenario_id: &str) -> Option<CacheEntry> {
        self.entries.lock().expect("cache lock").get(scenario_id).cloned()
    }

    pub fn insert(&self, entry: CacheEntry) -> Result<(), MutateError> {
        let mut guard = self.entries.lock().expect("cache lock");
        append_jsonl(self.path.as_deref(), &entry)?;
        guard.insert(entry.scenario_id.clone(), entry);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Default)]
pub struct FailureLog {
    path: Option<PathBuf>,
    counts: Mutex<HashMap<SiteKey, usize>>,
    frozen: Mutex<Option<HashSet<SiteKey>>>,
}

impl FailureLog {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn open(path: &Path) -> Result<Self, MutateError> {
        let mut counts = HashMap::new();
        for e in read_jsonl::<FailureEntry>(path)? {
            *counts.entry(e.site).or_insert(0) += 1;
        }
        Ok(FailureLog { path: Some(path.to_path_buf()), counts: Mutex::new(counts), frozen: Mutex::new(None) })
    }

    pub fn record(&self, entry: FailureEntry) -> Result<(), MutateError> {
        let mut guard = self.counts.lock().expect("log lock");
        append_jsonl(self.path.as_deref(), &entry)?;
        *guard.entry(entry.site).or_insert(0) += 1;
        Ok(())
    }

    pub fn rejections(&self, site: &SiteKey) -> usize {
        self.counts.lock().expect("log lock").get(site).copied().unwrap_or(0)
    }

    /// Fix the exclusion set at its current contents. Later rejections are
    /// still recorded but no longer change planning, so concurrent scenarios
    /// plan the same sites regardless of completion order.
    pub fn freeze(&self) {
        let now = self.live_excluded();
        *self.frozen.lock().expect("log lock") = Some(now);
    }

    /// Sites with at least [`EXCLUDE_AFTER`] rejections (as of the last
    /// [`FailureLog::freeze`], if any).
    pub fn excluded(&self) -> HashSet<SiteKey> {
        if let Some(f) = self.frozen.lock().expect("log lock").as_ref() {
            return f.clone();
        }
        self.live_excluded()
    }

    fn live_excluded(&self) -> HashSet<SiteKey> {
        self.counts.lock().expect("log lock").iter().filter(|(_, &n)| n >= EXCLUDE_AFTER).map(|(k, _)| k.clone()).collect()
    }
}
