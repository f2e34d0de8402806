// SPDX-License-Identifier: Apache-2.0

use super::OrchestrateError;
use crate::extract::{StatSet, ValueEncoding};
use crate::mutate::BugType;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Shell templates. Placeholders: `{design_dir}`, `{scenario_id}`, `{seed}`,
/// `{vcd_out}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulatorTemplates {
    pub compile: String,
    pub test: String,
    /// Exit 0: all tests passed. Exit 1: a test failed and `{vcd_out}` holds
    /// its dump. Anything else is a crash.
    pub simulate: String,
    pub timeout_secs: u64,
}

impl Default for SimulatorTemplates {
    fn default() -> Self {
        SimulatorTemplates { compile: String::new(), test: String::new(), simulate: String::new(), timeout_secs: 600 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Source directory of the pristine design.
    pub design_dir: PathBuf,
    /// Scratch copies, dumps, caches and logs go here.
    pub work_dir: PathBuf,
    /// Label modules. Empty means every module of the design.
    pub targets: Vec<String>,
    /// Window length T.
    pub tick_cap: usize,
    pub workers: usize,
    pub simulator: SimulatorTemplates,
    pub train_per_module: usize,
    pub test_per_module: usize,
    pub seed: u64,
    /// Comma-separated statistic names.
    pub stats: String,
    pub keep_fraction: f64,
    pub max_signals: usize,
    /// Regression reseeds per scenario; one dump each.
    pub reseeds: usize,
    pub max_retries: u32,
    pub mutation_attempts: u32,
    pub patches_per_scenario: usize,
    /// Bug types drawn from per scenario.
    pub bug_types: Vec<BugType>,
    /// Scope path of the DUT instance in the dumps.
    pub dut_root: String,
    /// Module the DUT instance instantiates. Empty means the design's root.
    pub top_module: String,
    pub encoding: ValueEncoding,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            design_dir: PathBuf::from("design"),
            work_dir: PathBuf::from("work"),
            targets: Vec::new(),
            tick_cap: 2000,
            workers: 1,
            simulator: SimulatorTemplates::default(),
            train_per_module: 100,
            test_per_module: 25,
            seed: 0,
            stats: StatSet::default().to_string(),
            keep_fraction: 0.6,
            max_signals: 5000,
            reseeds: 1,
            max_retries: 2,
            mutation_attempts: 4,
            patches_per_scenario: 1,
            bug_types: BugType::ALL.to_vec(),
            dut_root: "tb.dut".into(),
            top_module: String::new(),
            encoding: ValueEncoding::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, OrchestrateError> {
        let cfg: PipelineConfig = serde_json::from_str(text).map_err(|e| OrchestrateError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load and resolve relative paths against the file's directory.
    pub fn load(path: &Path) -> Result<Self, OrchestrateError> {
        let text = std::fs::read_to_string(path).map_err(|e| OrchestrateError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.design_dir, &mut cfg.work_dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), OrchestrateError> {
        let bad = |m: &str| Err(OrchestrateError::Config(m.to_string()));
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        if self.reseeds == 0 {
            return bad("reseeds must be at least 1");
        }
        if self.tick_cap == 0 {
            return bad("tick_cap must be at least 1");
        }
        if self.bug_types.is_empty() || self.patches_per_scenario == 0 {
            return bad("at least one bug type and one patch per scenario are required");
        }
        self.stat_set()?;
        Ok(())
    }

    pub fn stat_set(&self) -> Result<StatSet, OrchestrateError> {
        self.stats.parse().map_err(|e: crate::extract::ExtractError| OrchestrateError::Config(e.to_string()))
    }
}
