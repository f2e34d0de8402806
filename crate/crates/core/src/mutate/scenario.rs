// SPDX-License-Identifier: Apache-2.0

//! The accept/reject loop around one bug scenario.

use super::log::{CacheEntry, FailureEntry, FailureLog, MutationCache};
use super::patch::{apply, revert_all, PatchRecord};
use super::plan::{conforms, plan, BugType, MutationSpec, SiteKey};
use super::MutateError;
use crate::exec::{self, Exit};
use crate::rtl::ModuleLookupTable;
use crate::seed;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::path::Path;
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckOutcome {
    Pass,
    Fail,
    Timeout,
}

/// Compile and regression-test a (possibly patched) design.
pub trait Checker: Sync {
    fn compile(&self, design_dir: &Path, scenario_id: &str) -> Result<CheckOutcome, MutateError>;
    /// `Pass` means every test passed, i.e. the bug had no visible effect.
    fn test(&self, design_dir: &Path, scenario_id: &str) -> Result<CheckOutcome, MutateError>;
}

/// Runs shell templates; `{design_dir}` and `{scenario_id}` are substituted.
#[derive(Debug, Clone)]
pub struct CommandChecker {
    pub compile: String,
    pub test: String,
    pub timeout: Duration,
}

impl CommandChecker {
    fn run(&self, template: &str, design_dir: &Path, scenario_id: &str) -> Result<CheckOutcome, MutateError> {
        let dir = design_dir.display().to_string();
        let cmd = exec::render(template, &[("design_dir", &dir), ("scenario_id", scenario_id)]);
        match exec::run_shell(&cmd, None, self.timeout).map_err(|e| MutateError::Tool { cmd: cmd.clone(), msg: e.to_string() })? {
            Exit::Code(0) => Ok(CheckOutcome::Pass),
            Exit::Code(exec::NOT_FOUND) => Err(MutateError::Tool { cmd, msg: "command not found".into() }),
            Exit::TimedOut => Ok(CheckOutcome::Timeout),
            _ => Ok(CheckOutcome::Fail),
        }
    }
}

impl Checker for CommandChecker {
    fn compile(&self, design_dir: &Path, scenario_id: &str) -> Result<CheckOutcome, MutateError> {
        self.run(&self.compile, design_dir, scenario_id)
    }

    fn test(&self, design_dir: &Path, scenario_id: &str) -> Result<CheckOutcome, MutateError> {
        self.run(&self.test, design_dir, scenario_id)
    }
}

/// Source of mutation specs. The rule-based planner is the default; other
/// planners must still produce specs that satisfy the bug-type rules.
pub trait Planner: Sync {
    fn plan(
        &self,
        source: &str,
        file: &Path,
        table: &ModuleLookupTable,
        module: &str,
        bug: BugType,
        seed: u64,
        exclude: &HashSet<SiteKey>,
    ) -> Result<MutationSpec, MutateError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RulePlanner;

impl Planner for RulePlanner {
    fn plan(
        &self,
        source: &str,
        file: &Path,
        table: &ModuleLookupTable,
        module: &str,
        bug: BugType,
        seed: u64,
        exclude: &HashSet<SiteKey>,
    ) -> Result<MutationSpec, MutateError> {
        plan(source, file, table, module, bug, seed, exclude)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioStatus {
    Pending,
    Accepted,
    RejectedSyntax,
    RejectedIneffective,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugScenario {
    pub scenario_id: String,
    /// The module holding the bug; the classification label.
    pub label: String,
    /// Applied patches, in order. Empty unless accepted.
    pub patches: Vec<PatchRecord>,
    pub status: ScenarioStatus,
    pub attempts: u32,
    pub from_cache: bool,
}

impl BugScenario {
    pub fn specs(&self) -> Vec<MutationSpec> {
        self.patches.iter().map(|p| p.spec.clone()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct InjectRequest {
    pub scenario_id: String,
    pub module: String,
    /// One patch per entry, applied in order to the same module.
    pub bug_types: Vec<BugType>,
    pub seed: u64,
    pub max_attempts: u32,
}

fn read(root: &Path, file: &Path) -> Result<String, MutateError> {
    let path = root.join(file);
    std::fs::read_to_string(&path).map_err(|source| MutateError::Io { path, source })
}

fn replay(entry: &CacheEntry, root: &Path) -> Result<Option<Vec<PatchRecord>>, MutateError> {
    let mut applied = Vec::new();
    for spec in &entry.specs {
        match apply(spec, root) {
            Ok(r) => applied.push(r),
            Err(MutateError::StaleFile(_)) => {
                revert_all(&applied, root)?;
                return Ok(None);
            }
            Err(e) => {
                revert_all(&applied, root)?;
                return Err(e);
            }
        }
    }
    Ok(Some(applied))
}

/// Plan, apply and check mutations until one is accepted or attempts run
/// out. Accepted patches stay applied under `root`; rejected ones are
/// reverted and logged against their sites.
pub fn inject_scenario(
    req: &InjectRequest,
    root: &Path,
    table: &ModuleLookupTable,
    planner: &dyn Planner,
    checker: &dyn Checker,
    cache: &MutationCache,
    log: &FailureLog,
) -> Result<BugScenario, MutateError> {
    let mut scenario = BugScenario {
        scenario_id: req.scenario_id.clone(),
        label: req.module.clone(),
        patches: Vec::new(),
        status: ScenarioStatus::Pending,
        attempts: 0,
        from_cache: false,
    };
    if let Some(entry) = cache.get(&req.scenario_id).filter(|e| e.module == req.module) {
        if let Some(patches) = replay(&entry, root)? {
            scenario.patches = patches;
            scenario.status = ScenarioStatus::Accepted;
            scenario.from_cache = true;
            return Ok(scenario);
        }
    }
    let file = table.files.get(&req.module).ok_or_else(|| MutateError::UnknownModule(req.module.clone()))?.clone();
    let mut tried: HashSet<SiteKey> = HashSet::new();
    let reject = |patches: &[PatchRecord], reason: &str| -> Result<(), MutateError> {
        revert_all(patches, root)?;
        for p in patches {
            log.record(FailureEntry { scenario_id: req.scenario_id.clone(), site: p.spec.key(), reason: reason.to_string() })?;
        }
        Ok(())
    };
    for attempt in 0..req.max_attempts {
        scenario.attempts = attempt + 1;
        let mut exclude = log.excluded();
        exclude.extend(tried.iter().cloned());
        let mut patches: Vec<PatchRecord> = Vec::new();
        for (i, &bug) in req.bug_types.iter().enumerate() {
            let text = read(root, &file)?;
            let s = seed::substream(req.seed, "mutate.attempt", u64::from(attempt) << 8 | i as u64);
            let spec = match planner.plan(&text, &file, table, &req.module, bug, s, &exclude) {
                Ok(spec) => spec,
                Err(e) => {
                    revert_all(&patches, root)?;
                    // sites ran out after earlier rejections in this scenario
                    if attempt > 0 && matches!(e, MutateError::NoEligibleSite(_)) {
                        return Ok(scenario);
                    }
                    return Err(e);
                }
            };
            if !conforms(&spec) {
                revert_all(&patches, root)?;
                return Err(MutateError::NonConforming(spec.bug_type));
            }
            let rec = match apply(&spec, root) {
                Ok(r) => r,
                Err(e) => {
                    revert_all(&patches, root)?;
                    return Err(e);
                }
            };
            tried.insert(spec.key());
            exclude.insert(spec.key());
            patches.push(rec);
        }
        let compiled = checker.compile(root, &req.scenario_id);
        match compiled {
            Ok(CheckOutcome::Pass) => {}
            Ok(_) => {
                reject(&patches, "syntax")?;
                scenario.status = ScenarioStatus::RejectedSyntax;
                continue;
            }
            Err(e) => {
                revert_all(&patches, root)?;
                return Err(e);
            }
        }
        match checker.test(root, &req.scenario_id) {
            Ok(CheckOutcome::Fail) => {
                let specs = patches.iter().map(|p| p.spec.clone()).collect();
                cache.insert(CacheEntry { scenario_id: req.scenario_id.clone(), module: req.module.clone(), specs })?;
                scenario.patches = patches;
                scenario.status = ScenarioStatus::Accepted;
                return Ok(scenario);
            }
            Ok(outcome) => {
                reject(&patches, if outcome == CheckOutcome::Timeout { "timeout" } else { "ineffective" })?;
                scenario.status = ScenarioStatus::RejectedIneffective;
            }
            Err(e) => {
                revert_all(&patches, root)?;
                return Err(e);
            }
        }
    }
    Ok(scenario)
}
