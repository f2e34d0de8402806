// SPDX-License-Identifier: Apache-2.0

//! Criteria 1 to 4: the end-to-end fixture corpus.

use crate::{cores, serial, verdict};
use std::collections::BTreeSet;
use std::path::Path;
use std::sync::OnceLock;
use std::time::{Duration, Instant};
use tempfile::TempDir;
use wavetriage_core::extract::Dataset;
use wavetriage_core::fixtures::{gen_design, separability_certificate, Difficulty, FixtureChecker, FixtureDesign, ReplaySettings, ReplaySimulator, TOP};
use wavetriage_core::ml::{evaluate, fit, MetricsReport, ModelKind, ModelParams};
use wavetriage_core::mutate::{FailureLog, MutationCache, RulePlanner};
use wavetriage_core::orchestrate::{
    dispatch, run_data_pipeline, run_pipeline, scenario_jobs, ExtractSettings, JobContext, JobResult, PipelineConfig, PipelineOutcome,
    Split,
};
use wavetriage_core::rtl::signals_for_targets;
use wavetriage_core::select::PruneConfig;
use wavetriage_core::seed;

/// Eight target modules plus one non-target sibling.
const MODULES: usize = 9;
const DESIGN_SEED: u64 = 11;
const PIPELINE_SEED: u64 = 1;
const TRAIN_PER_MODULE: usize = 100;
const TEST_PER_MODULE: usize = 25;
const T_FULL: usize = 2000;
const T_SHORT: usize = 200;

const MIN_TOP1: f64 = 0.90;
const MIN_TOP3: f64 = 0.98;
const MAX_RUNTIME: Duration = Duration::from_secs(600);
const MAX_FINAL_OVER_ROUGH: f64 = 0.1;
const MAX_SIZE_DRIFT: f64 = 0.01;
const MAX_ABLATION_DROP: f64 = 0.05;
const SPEEDUP_SCENARIOS: usize = 40;
const MAX_PARALLEL_TIME_RATIO: f64 = 0.5;

fn easy_design(seed_value: u64) -> FixtureDesign {
    let mut d = gen_design(MODULES, seed_value).unwrap();
    d.replay = ReplaySettings { difficulty: Difficulty::Easy, ticks: 2100 };
    d
}

struct Corpus {
    _dir: TempDir,
    cfg: PipelineConfig,
    outcome: PipelineOutcome,
    pipeline_time: Duration,
    models: Vec<(ModelKind, MetricsReport, Duration)>,
}

fn settings(cfg: &PipelineConfig, outcome: &PipelineOutcome, tick_cap: usize) -> ExtractSettings {
    let targets: BTreeSet<String> = cfg.targets.iter().cloned().collect();
    ExtractSettings {
        tick_cap,
        stats: cfg.stat_set().unwrap(),
        encoding: cfg.encoding,
        prune: PruneConfig::new(&cfg.dut_root, TOP),
        target_signals: signals_for_targets(&outcome.table, &targets).unwrap(),
        instances: outcome.table.instances.clone(),
        workers: cfg.workers,
    }
}

fn model_seed(kind: ModelKind) -> u64 {
    seed::substream(PIPELINE_SEED, &format!("model/{kind}"), 0)
}

fn corpus() -> &'static Corpus {
    static C: OnceLock<Corpus> = OnceLock::new();
    C.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let design = easy_design(DESIGN_SEED);
        design.write(&dir.path().join("design")).unwrap();
        let cfg = PipelineConfig {
            design_dir: dir.path().join("design"),
            work_dir: dir.path().join("work"),
            targets: design.targets(),
            top_module: TOP.into(),
            train_per_module: TRAIN_PER_MODULE,
            test_per_module: TEST_PER_MODULE,
            seed: PIPELINE_SEED,
            tick_cap: T_FULL,
            workers: cores(),
            ..Default::default()
        };
        let start = Instant::now();
        let outcome = run_pipeline(&cfg, &RulePlanner, &FixtureChecker::new(&design.sources), &ReplaySimulator { design: design.clone() }).unwrap();
        let pipeline_time = start.elapsed();
        let models = ModelKind::ALL
            .iter()
            .map(|&kind| {
                let t = Instant::now();
                let m = fit(kind, &outcome.train, &ModelParams::default(), model_seed(kind)).unwrap();
                let r = evaluate(&m, &outcome.test).unwrap();
                (kind, r, t.elapsed())
            })
            .collect();
        Corpus { _dir: dir, cfg, outcome, pipeline_time, models }
    })
}

/// The same dumps re-extracted with a 200-tick window.
fn short_window() -> &'static (Dataset, Dataset, u64) {
    static S: OnceLock<(Dataset, Dataset, u64)> = OnceLock::new();
    S.get_or_init(|| {
        let c = corpus();
        let s = settings(&c.cfg, &c.outcome, T_SHORT);
        let split = |sp: Split| -> Vec<JobResult> { c.outcome.jobs.iter().filter(|r| r.job.split == sp).cloned().collect() };
        let (train, report) = run_data_pipeline(&split(Split::Train), &s).unwrap();
        let (test, _) = run_data_pipeline(&split(Split::Test), &s).unwrap();
        (train, test, report.final_csv)
    })
}

fn report(c: &Corpus, kind: ModelKind) -> &MetricsReport {
    &c.models.iter().find(|(k, _, _)| *k == kind).unwrap().1
}

#[test]
fn criterion_1_fixture_end_to_end_accuracy() {
    let _g = serial();
    let c = corpus();
    let cert = separability_certificate(&c.outcome.train, 3.0, 2);
    let (gbt, rf, knn) = (report(c, ModelKind::Gbt), report(c, ModelKind::RandomForest), report(c, ModelKind::Knn));
    let total = c.pipeline_time + c.models.iter().map(|(_, _, t)| *t).sum::<Duration>();
    let classes = c.outcome.train.classes().len();
    let pass = cert.passed
        && classes == MODULES - 1
        && gbt.top1 >= MIN_TOP1
        && gbt.top3 >= MIN_TOP3
        && rf.top1 >= MIN_TOP1
        && rf.top3 >= MIN_TOP3
        && knn.top1 < gbt.top1
        && total <= MAX_RUNTIME;
    let detail = format!(
        "{classes} classes, {} train / {} test rows, certificate {}; gbt top1 {:.3} top3 {:.3}; rf top1 {:.3} top3 {:.3}; knn top1 {:.3}; {:.1}s on {} core(s)",
        c.outcome.train.len(),
        c.outcome.test.len(),
        if cert.passed { "passed" } else { "failed" },
        gbt.top1,
        gbt.top3,
        rf.top1,
        rf.top3,
        knn.top1,
        total.as_secs_f64(),
        cores()
    );
    verdict(1, "fixture end-to-end accuracy", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_2_stage_compression() {
    let _g = serial();
    let c = corpus();
    let (tr, te) = (&c.outcome.train_report, &c.outcome.test_report);
    let rough = tr.rough + te.rough;
    let final_bytes = tr.final_csv + te.final_csv;
    let ratio = final_bytes as f64 / rough as f64;
    let short_final = short_window().2;
    let drift = (short_final as f64 - tr.final_csv as f64).abs() / tr.final_csv as f64;
    let pass = ratio <= MAX_FINAL_OVER_ROUGH && drift <= MAX_SIZE_DRIFT;
    let detail = format!(
        "raw {} B, rough {} B, compressed {} B, final {} B (final/rough {:.4}); train final at T={T_SHORT} {} B vs T={T_FULL} {} B (drift {:.4})",
        tr.raw + te.raw,
        rough,
        tr.compressed + te.compressed,
        final_bytes,
        ratio,
        short_final,
        tr.final_csv,
        drift
    );
    verdict(2, "stage compression", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_3_tick_cap_ablation() {
    let _g = serial();
    let c = corpus();
    let (train, test, _) = short_window();
    let m = fit(ModelKind::Gbt, train, &ModelParams::default(), model_seed(ModelKind::Gbt)).unwrap();
    let short = evaluate(&m, test).unwrap();
    let full = report(c, ModelKind::Gbt);
    let drop = full.top1 - short.top1;
    let pass = drop <= MAX_ABLATION_DROP;
    let detail = format!("gbt top1 {:.3} at T={T_FULL}, {:.3} at T={T_SHORT} (drop {:.3})", full.top1, short.top1, drop);
    verdict(3, "tick-cap ablation", pass, &detail);
    assert!(pass, "{detail}");
}

/// Dispatch plus extraction of the speedup corpus from a cold cache.
fn timed_run(design_dir: &Path, design: &FixtureDesign, work: &Path, workers: usize) -> (Duration, Vec<u8>) {
    let table = wavetriage_core::rtl::scan_sources(&wavetriage_core::rtl::DesignSources::load_dir(design_dir).unwrap()).unwrap();
    let targets = design.targets();
    let cfg = PipelineConfig {
        design_dir: design_dir.to_path_buf(),
        work_dir: work.to_path_buf(),
        targets: targets.clone(),
        top_module: TOP.into(),
        train_per_module: SPEEDUP_SCENARIOS / targets.len(),
        test_per_module: 0,
        seed: PIPELINE_SEED,
        workers,
        ..Default::default()
    };
    let jobs = scenario_jobs(&cfg, &targets);
    assert_eq!(jobs.len(), SPEEDUP_SCENARIOS);
    let (cache, log) = (MutationCache::in_memory(), FailureLog::in_memory());
    let (checker, simulator) = (FixtureChecker::new(&design.sources), ReplaySimulator { design: design.clone() });
    let vcd_dir = work.join("vcd");
    let ctx = JobContext {
        design_dir,
        table: &table,
        planner: &RulePlanner,
        checker: &checker,
        simulator: &simulator,
        cache: &cache,
        log: &log,
        vcd_dir: &vcd_dir,
        mutation_attempts: cfg.mutation_attempts,
        workers,
        max_retries: cfg.max_retries,
    };
    let target_set: BTreeSet<String> = targets.iter().cloned().collect();
    let settings = ExtractSettings {
        tick_cap: cfg.tick_cap,
        stats: cfg.stat_set().unwrap(),
        encoding: cfg.encoding,
        prune: PruneConfig::new(&cfg.dut_root, TOP),
        target_signals: signals_for_targets(&table, &target_set).unwrap(),
        instances: table.instances.clone(),
        workers,
    };
    let start = Instant::now();
    let done = dispatch(jobs, &ctx).unwrap();
    let (ds, _) = run_data_pipeline(&done, &settings).unwrap();
    (start.elapsed(), ds.to_csv_bytes())
}

#[test]
fn criterion_4_parallel_speedup() {
    let _g = serial();
    let dir = tempfile::tempdir().unwrap();
    let design = easy_design(DESIGN_SEED + 10);
    let design_dir = dir.path().join("design");
    design.write(&design_dir).unwrap();
    let (t1, bytes1) = timed_run(&design_dir, &design, &dir.path().join("w1"), 1);
    let (t4, bytes4) = timed_run(&design_dir, &design, &dir.path().join("w4"), 4);
    let ratio = t4.as_secs_f64() / t1.as_secs_f64();
    let identical = bytes1 == bytes4;
    let pass = identical && ratio <= MAX_PARALLEL_TIME_RATIO;
    let detail = format!(
        "{SPEEDUP_SCENARIOS} scenarios: workers=1 {:.2}s, workers=4 {:.2}s (ratio {:.3}, need <= {MAX_PARALLEL_TIME_RATIO}); datasets {} ({} B); {} core(s) available",
        t1.as_secs_f64(),
        t4.as_secs_f64(),
        ratio,
        if identical { "byte-identical" } else { "DIFFER" },
        bytes1.len(),
        cores()
    );
    verdict(4, "parallel speedup", pass, &detail);
    assert!(pass, "{detail}");
}
