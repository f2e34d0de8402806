// SPDX-License-Identifier: Apache-2.0

//! Dispatcher and workers. Each job copies the design into its own scratch
//! directory, injects its bug there and simulates once per reseed.

use super::OrchestrateError;
use crate::exec::{self, Exit};
use crate::mutate::{inject_scenario, BugScenario, BugType, Checker, FailureLog, InjectRequest, MutateError, MutationCache, Planner};
use crate::rtl::ModuleLookupTable;
use crate::seed;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::{mpsc, Condvar, Mutex};
use std::time::{Duration, Instant};

/// Written into each scratch design so command-driven simulators can see
/// which scenario they run.
pub const SCENARIO_FILE: &str = "scenario.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
    Retried,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioJob {
    pub scenario_id: String,
    pub label: String,
    pub split: Split,
    pub seed: u64,
    pub bug_types: Vec<BugType>,
    pub scratch_dir: PathBuf,
    pub reseed_count: usize,
    pub status: JobStatus,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobResult {
    pub job: ScenarioJob,
    pub scenario: Option<BugScenario>,
    /// `(reseed index, dump)` for every failing run.
    pub vcds: Vec<(usize, PathBuf)>,
    /// No accepted mutation: the design never failed.
    pub ineffective: bool,
    pub wall_ms: u64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimOutcome {
    Pass,
    Fail,
    Crash,
}

pub trait Simulator: Sync {
    /// Run the regression once; on `Fail`, `vcd_out` holds the dump.
    fn simulate(&self, design_dir: &Path, scenario_id: &str, seed: u64, vcd_out: &Path) -> Result<SimOutcome, OrchestrateError>;
}

#[derive(Debug, Clone)]
pub struct CommandSimulator {
    pub template: String,
    pub timeout: Duration,
}

impl Simulator for CommandSimulator {
    fn simulate(&self, design_dir: &Path, scenario_id: &str, seed: u64, vcd_out: &Path) -> Result<SimOutcome, OrchestrateError> {
        let (dir, seed, out) = (design_dir.display().to_string(), seed.to_string(), vcd_out.display().to_string());
        let cmd = exec::render(&self.template, &[("design_dir", &dir), ("scenario_id", scenario_id), ("seed", &seed), ("vcd_out", &out)]);
        let exit = exec::run_shell(&cmd, None, self.timeout).map_err(|e| OrchestrateError::SimulatorNotFound(format!("{cmd}: {e}")))?;
        Ok(match exit {
            Exit::Code(0) => SimOutcome::Pass,
            Exit::Code(1) if vcd_out.is_file() => SimOutcome::Fail,
            Exit::Code(exec::NOT_FOUND) => return Err(OrchestrateError::SimulatorNotFound(cmd)),
            _ => SimOutcome::Crash,
        })
    }
}

/// Everything a worker needs besides the job itself.
pub struct JobContext<'a> {
    pub design_dir: &'a Path,
    pub table: &'a ModuleLookupTable,
    pub planner: &'a dyn Planner,
    pub checker: &'a dyn Checker,
    pub simulator: &'a dyn Simulator,
    pub cache: &'a MutationCache,
    pub log: &'a FailureLog,
    /// Dumps land in `vcd_dir/<scenario>-s<r>.vcd`.
    pub vcd_dir: &'a Path,
    pub mutation_attempts: u32,
    pub workers: usize,
    pub max_retries: u32,
}

/// Claims scratch paths; a second job asking for the same path fails.
#[derive(Debug, Default)]
pub struct ScratchRegistry(Mutex<HashMap<PathBuf, String>>);

impl ScratchRegistry {
    pub fn claim(&self, path: &Path, scenario_id: &str) -> Result<(), OrchestrateError> {
        let mut g = self.0.lock().expect("registry lock");
        match g.get(path) {
            Some(owner) if owner != scenario_id => Err(OrchestrateError::ScratchCollision(path.to_path_buf())),
            _ => {
                g.insert(path.to_path_buf(), scenario_id.to_string());
                Ok(())
            }
        }
    }
}

fn copy_tree(from: &Path, to: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(to)?;
    for entry in std::fs::read_dir(from)? {
        let entry = entry?;
        let target = to.join(entry.file_name());
        if entry.file_type()?.is_dir() {
            copy_tree(&entry.path(), &target)?;
        } else {
            std::fs::copy(entry.path(), &target)?;
        }
    }
    Ok(())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OrchestrateError + '_ {
    move |e| OrchestrateError::Io(format!("{}: {e}", path.display()))
}

fn vcd_path(dir: &Path, scenario_id: &str, r: usize) -> PathBuf {
    dir.join(format!("{scenario_id}-s{r}.vcd"))
}

fn run_job(job: &ScenarioJob, ctx: &JobContext) -> Result<JobResult, OrchestrateError> {
    let start = Instant::now();
    let design = job.scratch_dir.join("design");
    if design.exists() {
        std::fs::remove_dir_all(&design).map_err(io_err(&design))?;
    }
    copy_tree(ctx.design_dir, &design).map_err(io_err(&design))?;
    let req = InjectRequest {
        scenario_id: job.scenario_id.clone(),
        module: job.label.clone(),
        bug_types: job.bug_types.clone(),
        seed: job.seed,
        max_attempts: ctx.mutation_attempts,
    };
    let mut result = JobResult { job: job.clone(), scenario: None, vcds: Vec::new(), ineffective: false, wall_ms: 0, error: None };
    match inject_scenario(&req, &design, ctx.table, ctx.planner, ctx.checker, ctx.cache, ctx.log) {
        Ok(s) if s.status == crate::mutate::ScenarioStatus::Accepted => {
            let json = serde_json::to_string_pretty(&s).expect("scenario serializes");
            let p = design.join(SCENARIO_FILE);
            std::fs::write(&p, json).map_err(io_err(&p))?;
            for r in 0..job.reseed_count {
                let out = vcd_path(ctx.vcd_dir, &job.scenario_id, r);
                let _ = std::fs::remove_file(&out);
                let reseed = seed::substream(job.seed, "reseed", r as u64);
                match ctx.simulator.simulate(&design, &job.scenario_id, reseed, &out)? {
                    SimOutcome::Fail => result.vcds.push((r, out)),
                    SimOutcome::Pass => {}
                    SimOutcome::Crash => return Err(OrchestrateError::SimulatorCrashed(job.scenario_id.clone())),
                }
            }
            result.ineffective = result.vcds.is_empty();
            result.scenario = Some(s);
        }
        Ok(s) => {
            result.ineffective = true;
            result.scenario = Some(s);
        }
        Err(MutateError::NoEligibleSite(b)) => {
            result.ineffective = true;
            result.error = Some(format!("no eligible {b} site"));
        }
        Err(MutateError::Tool { cmd, msg }) => return Err(OrchestrateError::SimulatorNotFound(format!("{cmd}: {msg}"))),
        Err(e) => return Err(OrchestrateError::Mutate(e.to_string())),
    }
    std::fs::remove_dir_all(&design).map_err(io_err(&design))?;
    result.wall_ms = start.elapsed().as_millis() as u64;
    Ok(result)
}

struct Queue {
    jobs: VecDeque<ScenarioJob>,
    closed: bool,
}

/// Run every job to a terminal status on `ctx.workers` threads. Failed jobs
/// are requeued up to `ctx.max_retries` times. Results are sorted by
/// scenario id. A missing simulator aborts the whole dispatch.
pub fn dispatch(jobs: Vec<ScenarioJob>, ctx: &JobContext) -> Result<Vec<JobResult>, OrchestrateError> {
    if ctx.workers == 0 {
        return Err(OrchestrateError::Config("workers must be at least 1".into()));
    }
    std::fs::create_dir_all(ctx.vcd_dir).map_err(io_err(ctx.vcd_dir))?;
    let registry = ScratchRegistry::default();
    for j in &jobs {
        registry.claim(&j.scratch_dir, &j.scenario_id)?;
    }
    let total = jobs.len();
    let queue = Mutex::new(Queue { jobs: jobs.into_iter().collect(), closed: false });
    let ready = Condvar::new();
    let (tx, rx) = mpsc::channel::<(ScenarioJob, Result<JobResult, OrchestrateError>)>();
    let mut results: Vec<JobResult> = Vec::with_capacity(total);
    let mut fatal = None;

    std::thread::scope(|scope| {
        for _ in 0..ctx.workers.min(total.max(1)) {
            let tx = tx.clone();
            let (queue, ready, registry) = (&queue, &ready, &registry);
            scope.spawn(move || loop {
                let job = {
                    let mut q = queue.lock().expect("queue lock");
                    loop {
                        if let Some(j) = q.jobs.pop_front() {
                            break Some(j);
                        }
                        if q.closed {
                            break None;
                        }
                        q = ready.wait(q).expect("queue lock");
                    }
                };
                let Some(mut job) = job else { return };
                job.status = JobStatus::Running;
                let out = registry.claim(&job.scratch_dir, &job.scenario_id).and_then(|_| {
                    catch_unwind(AssertUnwindSafe(|| run_job(&job, ctx)))
                        .unwrap_or_else(|_| Err(OrchestrateError::WorkerPanicked(job.scenario_id.clone())))
                });
                if tx.send((job, out)).is_err() {
                    return;
                }
            });
        }
        drop(tx);

        let mut outstanding = total;
        while outstanding > 0 {
            let Ok((mut job, out)) = rx.recv() else { break };
            match out {
                Ok(mut r) => {
                    r.job.status = JobStatus::Done;
                    r.job.attempts = job.attempts + 1;
                    results.push(r);
                    outstanding -= 1;
                }
                Err(e @ OrchestrateError::SimulatorNotFound(_)) => {
                    fatal = Some(e);
                    break;
                }
                Err(e) => {
                    job.attempts += 1;
                    if job.attempts <= ctx.max_retries {
                        job.status = JobStatus::Retried;
                        queue.lock().expect("queue lock").jobs.push_back(job);
                        ready.notify_one();
                    } else {
                        job.status = JobStatus::Failed;
                        results.push(JobResult {
                            job,
                            scenario: None,
                            vcds: Vec::new(),
                            ineffective: false,
                            wall_ms: 0,
                            error: Some(e.to_string()),
                        });
                        outstanding -= 1;
                    }
                }
            }
        }
        let mut q = queue.lock().expect("queue lock");
        q.closed = true;
        q.jobs.clear();
        drop(q);
        ready.notify_all();
    });
    if let Some(e) = fatal {
        return Err(e);
    }
    results.sort_by(|a, b| a.job.scenario_id.cmp(&b.job.scenario_id));
    Ok(results)
}
