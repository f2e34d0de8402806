// SPDX-License-Identifier: Apache-2.0

//! Hierarchical pruning of a dump's signal list against the lookup table.

use crate::rtl::Instance;
use crate::vcd::IdFilter;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SelectError {
    #[error("no signals selected; the dump hierarchy under `{0}` does not match the lookup table")]
    NoSignalsSelected(String),
    #[error("the DUT root scope path is empty")]
    EmptyRoot,
}

/// Where the design starts inside the dump: the scope path of the DUT
/// instance (e.g. `tb.dut`) and the module it instantiates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneConfig {
    pub dut_root: Vec<String>,
    pub top_module: String,
}

impl PruneConfig {
    pub fn new(dut_root: &str, top_module: &str) -> Self {
        PruneConfig { dut_root: dut_root.split('.').map(str::to_string).collect(), top_module: top_module.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectedSignal {
    pub full_name: String,
    pub id_code: String,
    pub width: u32,
    pub owning_target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub selected: Vec<SelectedSignal>,
    pub dropped_count: usize,
    pub per_target_counts: BTreeMap<String, usize>,
}

impl SelectionReport {
    /// The extraction filter: every selected id code.
    pub fn id_filter(&self) -> IdFilter {
        self.selected.iter().map(|s| s.id_code.clone()).collect()
    }

    pub fn names(&self) -> Vec<String> {
        self.selected.iter().map(|s| s.full_name.clone()).collect()
    }

    /// full name -> owning target.
    pub fn coverage(&self) -> BTreeMap<String, String> {
        self.selected.iter().map(|s| (s.full_name.clone(), s.owning_target.clone())).collect()
    }
}

/// Strip one trailing `[index]`, as generate loops and instance arrays
/// append to scope names.
fn base_scope_name(name: &str) -> &str {
    if let Some(open) = name.rfind('[') {
        if name.ends_with(']') {
            return &name[..open];
        }
    }
    name
}

/// Module owning the scope path `scopes` below the DUT root, or `None` when
/// the path leaves the design. Scopes that are not instances of the current
/// module are transparent (named blocks, generate scopes).
pub fn resolve_module<'a>(top: &'a str, scopes: &[&str], instances: &'a BTreeMap<String, Vec<Instance>>) -> &'a str {
    let mut module = top;
    for scope in scopes {
        let base = base_scope_name(scope);
        if let Some(inst) = instances.get(module).and_then(|list| list.iter().find(|i| i.name == base || i.name == *scope)) {
            module = inst.module.as_str();
        }
    }
    module
}

/// Keep a signal iff it lies under the DUT root, its instance path resolves
/// to a target module, and its leaf name is one of that target's variables.
/// Output order follows `hier_signals`.
pub fn prune(
    hier_signals: &[(String, String, u32)],
    target_signals: &BTreeMap<String, BTreeSet<String>>,
    instances: &BTreeMap<String, Vec<Instance>>,
    cfg: &PruneConfig,
) -> Result<SelectionReport, SelectError> {
    if cfg.dut_root.is_empty() {
        return Err(SelectError::EmptyRoot);
    }
    let mut selected = Vec::new();
    let mut per_target_counts: BTreeMap<String, usize> = target_signals.keys().map(|t| (t.clone(), 0)).collect();
    for (full_name, id_code, width) in hier_signals {
        let parts: Vec<&str> = full_name.split('.').collect();
        let (leaf, scopes) = parts.split_last().expect("split yields one item");
        if scopes.len() < cfg.dut_root.len() || scopes.iter().zip(&cfg.dut_root).any(|(a, b)| a != b) {
            continue;
        }
        let module = resolve_module(&cfg.top_module, &scopes[cfg.dut_root.len()..], instances);
        if target_signals.get(module).is_some_and(|vars| vars.contains(*leaf)) {
            *per_target_counts.get_mut(module).expect("initialized from targets") += 1;
            selected.push(SelectedSignal {
                full_name: full_name.clone(),
                id_code: id_code.clone(),
                width: *width,
                owning_target: module.to_string(),
            });
        }
    }
    if selected.is_empty() {
        return Err(SelectError::NoSignalsSelected(cfg.dut_root.join(".")));
    }
    Ok(SelectionReport { dropped_count: hier_signals.len() - selected.len(), selected, per_target_counts })
}
