// SPDX-License-Identifier: Apache-2.0

use super::dispatch::{dispatch, JobContext, JobResult, JobStatus, ScenarioJob, Simulator, Split};
use super::{OrchestrateError, PipelineConfig};
use crate::extract::{assemble, sample_file, standardize, summarize, Dataset, Sample, StatSet, ValueEncoding};
use crate::feature_select::{reduce, ReduceConfig, SignalRanking};
use crate::mutate::{Checker, FailureLog, MutationCache, Planner};
use crate::rtl::{scan_sources, signals_for_targets, DesignSources, Instance, ModuleLookupTable};
use crate::select::PruneConfig;
use crate::seed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Write;
use std::path::PathBuf;

/// Byte counts at each data stage, summed over all waveforms.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageReport {
    /// Dump files as simulated.
    pub raw: u64,
    /// Per-tick CSV of the sampled window, one file per waveform.
    pub rough: u64,
    /// One summarized CSV (with header) per waveform.
    pub compressed: u64,
    /// The assembled dataset CSV.
    pub final_csv: u64,
    pub waveforms: usize,
    /// Rows whose dump reached the tick cap.
    pub tick_capped: Vec<String>,
}

/// Settings for turning dumps into feature rows.
#[derive(Debug, Clone)]
pub struct ExtractSettings {
    pub tick_cap: usize,
    pub stats: StatSet,
    pub encoding: ValueEncoding,
    pub prune: PruneConfig,
    pub target_signals: BTreeMap<String, BTreeSet<String>>,
    pub instances: BTreeMap<String, Vec<Instance>>,
    pub workers: usize,
}

struct Counter(u64);

impl Write for Counter {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0 += buf.len() as u64;
        Ok(buf.len())
    }
    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

struct Processed {
    sample: Sample,
    names: Vec<String>,
    raw: u64,
    rough: u64,
    compressed: u64,
    capped: bool,
}

/// Sample, standardize and summarize every failing dump in parallel, then
/// assemble rows in scenario order. Row ids are `<scenario>-s<reseed>`.
pub fn run_data_pipeline(done: &[JobResult], cfg: &ExtractSettings) -> Result<(Dataset, StageReport), OrchestrateError> {
    let inputs: Vec<WaveInput> = done
        .iter()
        .filter(|r| r.job.status == JobStatus::Done)
        .flat_map(|r| {
            r.vcds.iter().map(move |(k, p)| WaveInput { row_id: format!("{}-s{k}", r.job.scenario_id), label: r.job.label.clone(), path: p.clone() })
        })
        .collect();
    extract_dataset(inputs, cfg)
}

/// One labelled dump on disk.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct WaveInput {
    pub row_id: String,
    pub label: String,
    pub path: PathBuf,
}

/// Extract a dataset from labelled dumps; rows are ordered by id.
pub fn extract_dataset(mut inputs: Vec<WaveInput>, cfg: &ExtractSettings) -> Result<(Dataset, StageReport), OrchestrateError> {
    if inputs.is_empty() {
        return Err(OrchestrateError::NoFailingWaveforms);
    }
    inputs.sort();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers.max(1)).build().map_err(|e| OrchestrateError::Io(e.to_string()))?;
    let processed: Vec<Result<Processed, OrchestrateError>> = pool.install(|| {
        inputs
            .par_iter()
            .map(|WaveInput { row_id: id, label, path }| {
                let err = |e: crate::extract::ExtractError| OrchestrateError::Extract(format!("{}: {e}", path.display()));
                let raw = std::fs::metadata(path).map_err(|e| OrchestrateError::Io(format!("{}: {e}", path.display())))?.len();
                let (_, window) =
                    sample_file(path, &cfg.target_signals, &cfg.instances, &cfg.prune, cfg.tick_cap, &cfg.encoding, label, id).map_err(err)?;
                let rough = window.write_rough_csv(Counter(0)).map_err(err)?.0;
                let capped = window.tick_capped(cfg.tick_cap);
                let row = summarize(&standardize(window, cfg.tick_cap), &cfg.stats);
                let sample = Sample { scenario_id: row.scenario_id, label: row.label, features: row.features };
                let single = Dataset::new(row.feature_names.clone(), vec![sample.clone()]);
                let compressed = single.to_csv_bytes().len() as u64;
                Ok(Processed { sample, names: row.feature_names, raw, rough, compressed, capped })
            })
            .collect()
    });
    let mut report = StageReport::default();
    let mut rows = Vec::with_capacity(processed.len());
    for p in processed {
        let p = p?;
        report.raw += p.raw;
        report.rough += p.rough;
        report.compressed += p.compressed;
        report.waveforms += 1;
        if p.capped {
            report.tick_capped.push(p.sample.scenario_id.clone());
        }
        rows.push(crate::extract::FeatureRow {
            features: p.sample.features,
            feature_names: p.names,
            label: p.sample.label,
            scenario_id: p.sample.scenario_id,
        });
    }
    let ds = assemble(rows).map_err(|e| OrchestrateError::Extract(e.to_string()))?;
    report.final_csv = ds.to_csv_bytes().len() as u64;
    Ok((ds, report))
}

/// Train and test ids never overlap: `<module>-tr-NNNN` and `<module>-te-NNNN`.
pub fn scenario_jobs(cfg: &PipelineConfig, targets: &[String]) -> Vec<ScenarioJob> {
    let mut jobs = Vec::new();
    for module in targets {
        for (split, tag, n) in [(Split::Train, "tr", cfg.train_per_module), (Split::Test, "te", cfg.test_per_module)] {
            for i in 0..n {
                let id = format!("{module}-{tag}-{i:04}");
                let s = seed::substream(cfg.seed, &format!("scenario/{id}"), 0);
                let pick = (seed::substream(s, "bug_type", 0) % cfg.bug_types.len() as u64) as usize;
                jobs.push(ScenarioJob {
                    scratch_dir: cfg.work_dir.join("scratch").join(&id),
                    scenario_id: id,
                    label: module.clone(),
                    split,
                    seed: s,
                    bug_types: vec![cfg.bug_types[pick]; cfg.patches_per_scenario],
                    reseed_count: cfg.reseeds,
                    status: JobStatus::Queued,
                    attempts: 0,
                });
            }
        }
    }
    jobs
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub table: ModuleLookupTable,
    pub jobs: Vec<JobResult>,
    pub train: Dataset,
    pub test: Dataset,
    pub train_report: StageReport,
    pub test_report: StageReport,
    /// Reduction history; empty when the signal count was within limits.
    pub reduction: Vec<SignalRanking>,
}

/// Scan, dispatch every scenario, then extract train and test separately.
pub fn run_pipeline(
    cfg: &PipelineConfig,
    planner: &dyn Planner,
    checker: &dyn Checker,
    simulator: &dyn Simulator,
) -> Result<PipelineOutcome, OrchestrateError> {
    cfg.validate()?;
    let sources = DesignSources::load_dir(&cfg.design_dir).map_err(|e| OrchestrateError::Rtl(e.to_string()))?;
    let table = scan_sources(&sources).map_err(|e| OrchestrateError::Rtl(e.to_string()))?;
    let targets: Vec<String> = if cfg.targets.is_empty() { table.modules.keys().cloned().collect() } else { cfg.targets.clone() };
    let top = if cfg.top_module.is_empty() {
        match table.roots().as_slice() {
            [one] => one.to_string(),
            _ => return Err(OrchestrateError::Config("the design has several roots; set top_module".into())),
        }
    } else {
        cfg.top_module.clone()
    };
    let target_set: BTreeSet<String> = targets.iter().cloned().collect();
    let target_signals = signals_for_targets(&table, &target_set).map_err(|e| OrchestrateError::Rtl(e.to_string()))?;

    std::fs::create_dir_all(&cfg.work_dir).map_err(|e| OrchestrateError::Io(format!("{}: {e}", cfg.work_dir.display())))?;
    let mutate_err = |e: crate::mutate::MutateError| OrchestrateError::Mutate(e.to_string());
    let cache = MutationCache::open(&cfg.work_dir.join("mutation_cache.jsonl")).map_err(mutate_err)?;
    let log = FailureLog::open(&cfg.work_dir.join("mutation_failures.jsonl")).map_err(mutate_err)?;
    log.freeze();
    let vcd_dir = cfg.work_dir.join("vcd");
    let ctx = JobContext {
        design_dir: &cfg.design_dir,
        table: &table,
        planner,
        checker,
        simulator,
        cache: &cache,
        log: &log,
        vcd_dir: &vcd_dir,
        mutation_attempts: cfg.mutation_attempts,
        workers: cfg.workers,
        max_retries: cfg.max_retries,
    };
    let jobs = dispatch(scenario_jobs(cfg, &targets), &ctx)?;

    let settings = ExtractSettings {
        tick_cap: cfg.tick_cap,
        stats: cfg.stat_set()?,
        encoding: cfg.encoding,
        prune: PruneConfig::new(&cfg.dut_root, &top),
        target_signals,
        instances: table.instances.clone(),
        workers: cfg.workers,
    };
    let split = |s: Split| -> Vec<JobResult> { jobs.iter().filter(|r| r.job.split == s).cloned().collect() };
    let (train, train_report) = run_data_pipeline(&split(Split::Train), &settings)?;
    let (mut test, test_report) = run_data_pipeline(&split(Split::Test), &settings)?;

    let rc = ReduceConfig { keep_fraction: cfg.keep_fraction, max_signals: cfg.max_signals, seed: cfg.seed, ..Default::default() };
    let (train, reduction) = reduce_to_limit(train, &rc, &settings, &target_set)?;
    let keep: HashSet<String> = train.signals().into_iter().collect();
    test = test.restrict_signals(&keep);
    Ok(PipelineOutcome { table, jobs, train, test, train_report, test_report, reduction })
}

/// Apply signal reduction when `train` holds more than `rc.max_signals`
/// signals. Returns the dataset unchanged with an empty history otherwise.
pub fn reduce_to_limit(
    train: Dataset,
    rc: &ReduceConfig,
    settings: &ExtractSettings,
    targets: &BTreeSet<String>,
) -> Result<(Dataset, Vec<SignalRanking>), OrchestrateError> {
    if train.signals().len() <= rc.max_signals {
        return Ok((train, Vec::new()));
    }
    let coverage = signal_owners(&train, settings);
    let out = reduce(&train, rc, &coverage, targets).map_err(|e| OrchestrateError::Extract(e.to_string()))?;
    Ok((out.dataset, out.history))
}

/// Owning target of each dataset signal, resolved through the hierarchy.
/// Dataset signals were selected under the DUT root.
fn signal_owners(ds: &Dataset, s: &ExtractSettings) -> BTreeMap<String, String> {
    ds.signals()
        .into_iter()
        .map(|sig| {
            let parts: Vec<&str> = sig.split('.').collect();
            let module = crate::select::resolve_module(&s.prune.top_module, &parts[s.prune.dut_root.len()..parts.len() - 1], &s.instances);
            let module = module.to_string();
            (sig, module)
        })
        .collect()
}
