// SPDX-License-Identifier: Apache-2.0

//! Rule-based bug injection with hash-guarded, reversible patches.

mod log;
mod patch;
mod plan;
mod scenario;

pub use log::{CacheEntry, FailureEntry, FailureLog, MutationCache, EXCLUDE_AFTER};
pub use patch::{apply, apply_to_text, revert, revert_all, PatchRecord};
pub use plan::{conforms, eligible_sites, plan, sha256_hex, BugType, MutationSpec, Site, SiteKey};
pub use scenario::{
    inject_scenario, BugScenario, CheckOutcome, Checker, CommandChecker, InjectRequest, Planner, RulePlanner, ScenarioStatus,
};

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MutateError {
    #[error("{0} changed since the mutation was planned")]
    StaleFile(PathBuf),
    #[error("{0} does not match the patched contents; refusing to revert")]
    HashMismatch(PathBuf),
    #[error("no eligible {0} site")]
    NoEligibleSite(BugType),
    #[error("unknown module `{0}`")]
    UnknownModule(String),
    #[error("unknown bug type `{0}`")]
    UnknownBugType(String),
    #[error("planner produced a {0} rewrite outside the rules")]
    NonConforming(BugType),
    #[error("`{cmd}`: {msg}")]
    Tool { cmd: String, msg: String },
    #[error("{path}: {msg}")]
    Store { path: PathBuf, msg: String },
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Rtl(#[from] crate::rtl::RtlError),
}
