// SPDX-License-Identifier: Apache-2.0

use crate::cli::{CheckStage, Command, DesignArgs, DifficultyArg, FixtureCommand, Globals, Kind};
use crate::error::CliError;
use crate::manifest::{write_bytes, write_json, RunManifest};
use crate::report;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Duration;
use wavetriage_core::extract::{sample_file, Dataset};
use wavetriage_core::feature_select::ReduceConfig;
use wavetriage_core::fixtures::{self, Difficulty, FixtureChecker, FixtureDesign, ReplaySettings};
use wavetriage_core::ml::{self, ClassifierModel, ModelKind, ModelParams};
use wavetriage_core::mutate::{self, BugType, CheckOutcome, Checker, CommandChecker, FailureLog, InjectRequest, MutationCache, RulePlanner};
use wavetriage_core::orchestrate::{
    self, extract_dataset, reduce_to_limit, run_data_pipeline, run_pipeline, CommandSimulator, ExtractSettings, JobResult, JobStatus,
    PipelineConfig, SimOutcome, Split, StageReport, WaveInput,
};
use wavetriage_core::rtl::{scan_sources, signals_for_targets, DesignSources};
use wavetriage_core::select::{prune, PruneConfig};
use wavetriage_core::seed;
use wavetriage_core::vcd::{list_full_names, parse_header};

/// Returns the process exit status on success.
pub fn run(command: Command, g: &Globals) -> Result<i32, CliError> {
    let cfg = resolve(g)?;
    match command {
        Command::Scan { sources, out } => scan(&cfg, g, &sources, out.as_deref()),
        Command::Select { vcd, design, out } => select(&cfg, g, &vcd, &design, out.as_deref()),
        Command::Extract { vcd, design, label, out } => extract(&cfg, g, &vcd, &design, &label, &out),
        Command::Compress { manifest, design, restrict_to, out } => compress(&cfg, g, &manifest, &design, restrict_to.as_deref(), &out),
        Command::Train { data, kind, params, out } => train(&cfg, g, &data, kind, params.as_deref(), &out),
        Command::Eval { model, test, json } => eval(&cfg, g, &model, &test, &json),
        Command::Inject { design_dir, module, bug_types, scenario_id, attempts, out_dir } => {
            inject(&cfg, g, &design_dir, &module, &bug_types, &scenario_id, attempts, &out_dir)
        }
        Command::Pipeline { out, models, ablation } => pipeline(&cfg, g, &out, &models, &ablation),
        Command::Report { metrics, stages, ablation, svg, out } => {
            report_cmd(&cfg, g, &metrics, stages.as_deref(), ablation.as_deref(), svg.as_deref(), out.as_deref())
        }
        Command::Fixture(f) => fixture(&cfg, g, f),
    }
}

/// Config file (or defaults), then environment and flags on top. Clap has
/// already folded the environment into `g`.
pub fn resolve(g: &Globals) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &g.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(v) = g.seed {
        cfg.seed = v;
    }
    if let Some(v) = g.workers {
        cfg.workers = v;
    }
    if let Some(v) = g.tick_cap {
        cfg.tick_cap = v;
    }
    if let Some(v) = &g.stats {
        cfg.stats = v.clone();
    }
    if let Some(v) = g.keep_fraction {
        cfg.keep_fraction = v;
    }
    if let Some(v) = g.max_signals {
        cfg.max_signals = v;
    }
    cfg.validate()?;
    if !(0.5..=0.7).contains(&cfg.keep_fraction) {
        return Err(CliError::Usage(format!("keep fraction must lie in [0.5, 0.7], got {}", cfg.keep_fraction)));
    }
    Ok(cfg)
}

fn manifest(command: &str, cfg: &PipelineConfig, g: &Globals) -> Result<RunManifest, CliError> {
    let settings = serde_json::json!({
        "seed": cfg.seed,
        "workers": cfg.workers,
        "tick_cap": cfg.tick_cap,
        "stats": cfg.stats,
        "keep_fraction": cfg.keep_fraction,
        "max_signals": cfg.max_signals,
    });
    let mut m = RunManifest::new(command, g.config.as_deref(), settings);
    m.seed("root", cfg.seed);
    if let Some(p) = &g.config {
        m.input(p)?;
    }
    Ok(m)
}

fn load_sources(paths: &[PathBuf]) -> Result<DesignSources, CliError> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            for (rel, text) in DesignSources::load_dir(p)?.files {
                files.push((p.join(rel), text));
            }
        } else {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            files.push((p.clone(), text));
        }
    }
    Ok(DesignSources { files })
}

/// Resolved selection inputs for dump-reading commands.
struct DesignView {
    targets: BTreeSet<String>,
    settings: ExtractSettings,
}

fn design_view(cfg: &PipelineConfig, d: &DesignArgs) -> Result<DesignView, CliError> {
    let table = scan_sources(&load_sources(&d.sources)?)?;
    let targets: BTreeSet<String> = if !d.targets.is_empty() {
        d.targets.iter().cloned().collect()
    } else if !cfg.targets.is_empty() {
        cfg.targets.iter().cloned().collect()
    } else {
        table.modules.keys().cloned().collect()
    };
    let top = match d.top.clone().filter(|t| !t.is_empty()).or_else(|| Some(cfg.top_module.clone()).filter(|t| !t.is_empty())) {
        Some(t) => t,
        None => match table.roots().as_slice() {
            [one] => one.to_string(),
            _ => return Err(CliError::Usage("the design has several roots; pass --top".into())),
        },
    };
    let dut_root = d.dut_root.clone().unwrap_or_else(|| cfg.dut_root.clone());
    let target_signals = signals_for_targets(&table, &targets)?;
    let settings = ExtractSettings {
        tick_cap: cfg.tick_cap,
        stats: cfg.stat_set()?,
        encoding: cfg.encoding,
        prune: PruneConfig::new(&dut_root, &top),
        target_signals,
        instances: table.instances.clone(),
        workers: cfg.workers,
    };
    Ok(DesignView { targets, settings })
}

fn emit_text(text: &str, out: Option<&Path>, m: &mut RunManifest) -> Result<(), CliError> {
    match out {
        Some(p) => {
            write_bytes(p, text.as_bytes())?;
            m.output(p);
            m.write_beside(p)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn scan(cfg: &PipelineConfig, g: &Globals, sources: &[PathBuf], out: Option<&Path>) -> Result<i32, CliError> {
    let mut m = manifest("scan", cfg, g)?;
    for p in sources {
        m.input(p)?;
    }
    let table = scan_sources(&load_sources(sources)?)?;
    let mut text = table.to_json();
    text.push('\n');
    emit_text(&text, out, &mut m)?;
    Ok(0)
}

fn select(cfg: &PipelineConfig, g: &Globals, vcd: &Path, d: &DesignArgs, out: Option<&Path>) -> Result<i32, CliError> {
    let mut m = manifest("select", cfg, g)?;
    m.input(vcd)?;
    let view = design_view(cfg, d)?;
    let f = std::fs::File::open(vcd).map_err(|e| CliError::io(vcd, e))?;
    let (tree, _) = parse_header(BufReader::new(f)).map_err(|e| CliError::Data(format!("{}: {e}", vcd.display())))?;
    let report = prune(&list_full_names(&tree), &view.settings.target_signals, &view.settings.instances, &view.settings.prune)?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    emit_text(&text, out, &mut m)?;
    Ok(0)
}

fn extract(cfg: &PipelineConfig, g: &Globals, vcd: &Path, d: &DesignArgs, label: &str, out: &Path) -> Result<i32, CliError> {
    let mut m = manifest("extract", cfg, g)?;
    m.input(vcd)?;
    let view = design_view(cfg, d)?;
    let s = &view.settings;
    let id = vcd.file_stem().map_or_else(|| "dump".to_string(), |n| n.to_string_lossy().into_owned());
    let (_, window) = sample_file(vcd, &s.target_signals, &s.instances, &s.prune, s.tick_cap, &s.encoding, label, &id)?;
    let bytes = window.write_rough_csv(Vec::new())?;
    write_bytes(out, &bytes)?;
    m.output(out).write_beside(out)?;
    Ok(0)
}

#[derive(Debug, Deserialize)]
struct ManifestEntry {
    file: PathBuf,
    label: String,
}

fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    let f = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Dataset::read_csv(BufReader::new(f)).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write_dataset(path: &Path, ds: &Dataset) -> Result<(), CliError> {
    write_bytes(path, &ds.to_csv_bytes())
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn compress(
    cfg: &PipelineConfig,
    g: &Globals,
    manifest_path: &Path,
    d: &DesignArgs,
    restrict_to: Option<&Path>,
    out: &Path,
) -> Result<i32, CliError> {
    let mut m = manifest("compress", cfg, g)?;
    m.input(manifest_path)?;
    let text = std::fs::read_to_string(manifest_path).map_err(|e| CliError::io(manifest_path, e))?;
    let entries: Vec<ManifestEntry> = serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", manifest_path.display())))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let inputs: Vec<WaveInput> = entries
        .into_iter()
        .map(|e| {
            let path = if e.file.is_relative() { base.join(&e.file) } else { e.file };
            let row_id = path.file_stem().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
            WaveInput { row_id, label: e.label, path }
        })
        .collect();
    let view = design_view(cfg, d)?;
    let (ds, stages) = extract_dataset(inputs, &view.settings)?;
    let (ds, history) = match restrict_to {
        Some(p) => {
            m.input(p)?;
            let keep: HashSet<String> = read_dataset(p)?.signals().into_iter().collect();
            (ds.restrict_signals(&keep), Vec::new())
        }
        None => {
            let rc = reduce_config(cfg);
            reduce_to_limit(ds, &rc, &view.settings, &view.targets)?
        }
    };
    write_dataset(out, &ds)?;
    let stages_path = sibling(out, ".stages.json");
    write_json(&stages_path, &stages)?;
    let reduction_path = sibling(out, ".reduction.json");
    write_json(&reduction_path, &history)?;
    m.output(out).output(&stages_path).output(&reduction_path).write_beside(out)?;
    eprintln!("{} rows, {} features, {} signals", ds.len(), ds.n_features(), ds.signals().len());
    Ok(0)
}

fn reduce_config(cfg: &PipelineConfig) -> ReduceConfig {
    ReduceConfig { keep_fraction: cfg.keep_fraction, max_signals: cfg.max_signals, seed: cfg.seed, ..Default::default() }
}

fn model_kind(k: Kind) -> ModelKind {
    match k {
        Kind::Knn => ModelKind::Knn,
        Kind::RandomForest => ModelKind::RandomForest,
        Kind::Gbt => ModelKind::Gbt,
    }
}

/// Fitting seed for a model kind, derived from the root seed.
pub fn model_seed(root: u64, kind: ModelKind) -> u64 {
    seed::substream(root, &format!("model/{kind}"), 0)
}

fn train(cfg: &PipelineConfig, g: &Globals, data: &Path, kind: Kind, params: Option<&Path>, out: &Path) -> Result<i32, CliError> {
    let mut m = manifest("train", cfg, g)?;
    m.input(data)?;
    let params: ModelParams = match params {
        Some(p) => {
            m.input(p)?;
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
        }
        None => ModelParams::default(),
    };
    let kind = model_kind(kind);
    let ds = read_dataset(data)?;
    let s = model_seed(cfg.seed, kind);
    let model = ml::fit(kind, &ds, &params, s)?;
    write_bytes(out, &model.to_bytes())?;
    m.seed("model", s).output(out).write_beside(out)?;
    Ok(0)
}

fn read_model(path: &Path) -> Result<ClassifierModel, CliError> {
    let f = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    ClassifierModel::read_from(BufReader::new(f)).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn eval(cfg: &PipelineConfig, g: &Globals, model: &Path, test: &Path, json: &Path) -> Result<i32, CliError> {
    let mut m = manifest("eval", cfg, g)?;
    m.input(model)?.input(test)?;
    let model = read_model(model)?;
    let report = ml::evaluate(&model, &read_dataset(test)?)?;
    write_bytes(json, report.to_json().as_bytes())?;
    m.output(json).write_beside(json)?;
    print!("{}", report.render_text());
    Ok(0)
}

fn copy_tree(from: &Path, to: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(to).map_err(|e| CliError::io(to, e))?;
    for entry in std::fs::read_dir(from).map_err(|e| CliError::io(from, e))? {
        let p = entry.map_err(|e| CliError::io(from, e))?.path();
        let dest = to.join(p.file_name().expect("directory entries have names"));
        if p.is_dir() {
            copy_tree(&p, &dest)?;
        } else {
            std::fs::copy(&p, &dest).map_err(|e| CliError::io(&p, e))?;
        }
    }
    Ok(())
}

fn command_checker(cfg: &PipelineConfig) -> Result<CommandChecker, CliError> {
    let t = &cfg.simulator;
    if t.compile.is_empty() || t.test.is_empty() {
        return Err(CliError::Usage("config `simulator.compile` and `simulator.test` templates are required".into()));
    }
    Ok(CommandChecker { compile: t.compile.clone(), test: t.test.clone(), timeout: Duration::from_secs(t.timeout_secs) })
}

#[allow(clippy::too_many_arguments)]
fn inject(
    cfg: &PipelineConfig,
    g: &Globals,
    design_dir: &Path,
    module: &str,
    bug_types: &[String],
    scenario_id: &str,
    attempts: Option<u32>,
    out_dir: &Path,
) -> Result<i32, CliError> {
    let checker = command_checker(cfg)?;
    let bugs = bug_types.iter().map(|b| b.parse::<BugType>()).collect::<Result<Vec<_>, _>>()?;
    let mut m = manifest("inject", cfg, g)?;
    m.input(design_dir)?;
    if out_dir.exists() && std::fs::read_dir(out_dir).map_err(|e| CliError::io(out_dir, e))?.next().is_some() {
        return Err(CliError::Usage(format!("{} exists and is not empty", out_dir.display())));
    }
    copy_tree(design_dir, out_dir)?;
    let table = scan_sources(&DesignSources::load_dir(out_dir)?)?;
    let s = seed::substream(cfg.seed, &format!("scenario/{scenario_id}"), 0);
    let req = InjectRequest {
        scenario_id: scenario_id.to_string(),
        module: module.to_string(),
        bug_types: bugs,
        seed: s,
        max_attempts: attempts.unwrap_or(cfg.mutation_attempts),
    };
    let scenario =
        mutate::inject_scenario(&req, out_dir, &table, &RulePlanner, &checker, &MutationCache::in_memory(), &FailureLog::in_memory())?;
    let scenario_path = out_dir.join(orchestrate::SCENARIO_FILE);
    write_json(&scenario_path, &scenario)?;
    m.seed("scenario", s).output(out_dir).write_beside(out_dir)?;
    println!("{scenario_id}: {:?} after {} attempt(s)", scenario.status, scenario.attempts);
    Ok(0)
}

/// Per-job summary without wall-clock fields.
#[derive(Debug, Serialize)]
struct JobSummary<'a> {
    scenario_id: &'a str,
    label: &'a str,
    split: Split,
    status: JobStatus,
    attempts: u32,
    mutation_attempts: u32,
    ineffective: bool,
    waveforms: usize,
    error: Option<&'a str>,
}

fn summarize_jobs(jobs: &[JobResult]) -> Vec<JobSummary<'_>> {
    jobs.iter()
        .map(|r| JobSummary {
            scenario_id: &r.job.scenario_id,
            label: &r.job.label,
            split: r.job.split,
            status: r.job.status,
            attempts: r.job.attempts,
            mutation_attempts: r.scenario.as_ref().map_or(0, |s| s.attempts),
            ineffective: r.ineffective,
            waveforms: r.vcds.len(),
            error: r.error.as_deref(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagesFile {
    pub train: StageReport,
    pub test: StageReport,
}

fn pipeline(cfg: &PipelineConfig, g: &Globals, out: &Path, models: &[Kind], ablation: &[usize]) -> Result<i32, CliError> {
    let checker = command_checker(cfg)?;
    if cfg.simulator.simulate.is_empty() {
        return Err(CliError::Usage("config `simulator.simulate` template is required".into()));
    }
    let simulator = CommandSimulator { template: cfg.simulator.simulate.clone(), timeout: Duration::from_secs(cfg.simulator.timeout_secs) };
    let mut m = manifest("pipeline", cfg, g)?;
    m.input(&cfg.design_dir)?;
    let outcome = run_pipeline(cfg, &RulePlanner, &checker, &simulator)?;

    let files = [
        ("train.csv", outcome.train.to_csv_bytes()),
        ("test.csv", outcome.test.to_csv_bytes()),
    ];
    for (name, bytes) in files {
        let p = out.join(name);
        write_bytes(&p, &bytes)?;
        m.output(&p);
    }
    let stages = StagesFile { train: outcome.train_report.clone(), test: outcome.test_report.clone() };
    for (name, value) in [
        ("stages.json", serde_json::to_value(&stages)?),
        ("reduction.json", serde_json::to_value(&outcome.reduction)?),
        ("jobs.json", serde_json::to_value(summarize_jobs(&outcome.jobs))?),
    ] {
        let p = out.join(name);
        write_json(&p, &value)?;
        m.output(&p);
    }

    let mut metric_files = Vec::new();
    for kind in models.iter().copied().map(model_kind) {
        let s = model_seed(cfg.seed, kind);
        let model = ml::fit(kind, &outcome.train, &ModelParams::default(), s)?;
        let report = ml::evaluate(&model, &outcome.test)?;
        let mp = out.join("models").join(format!("{kind}.bin"));
        write_bytes(&mp, &model.to_bytes())?;
        let jp = out.join("metrics").join(format!("{kind}.json"));
        write_bytes(&jp, report.to_json().as_bytes())?;
        m.seed(&format!("model/{kind}"), s).output(&mp).output(&jp);
        println!("{kind}: top1 {:.3} top3 {:.3} macro_f1 {:.3}", report.top1, report.top3, report.macro_f1);
        metric_files.push((kind.to_string(), report));
    }

    let ablation_rows = if ablation.is_empty() {
        None
    } else {
        let rows = tick_ablation(cfg, &outcome, ablation)?;
        let p = out.join("ablation.json");
        write_json(&p, &rows)?;
        m.output(&p);
        Some(rows)
    };

    let text = report::render(&metric_files, Some(&stages), ablation_rows.as_deref());
    let rp = out.join("report.txt");
    write_bytes(&rp, text.as_bytes())?;
    m.output(&rp);
    m.write_into(out)?;
    Ok(0)
}

/// Boosted-model accuracy when the same dumps are re-extracted at other
/// window lengths. Signals are restricted to the main training set's.
fn tick_ablation(cfg: &PipelineConfig, outcome: &orchestrate::PipelineOutcome, caps: &[usize]) -> Result<Vec<report::AblationRow>, CliError> {
    let targets: BTreeSet<String> =
        if cfg.targets.is_empty() { outcome.table.modules.keys().cloned().collect() } else { cfg.targets.iter().cloned().collect() };
    let top = if cfg.top_module.is_empty() {
        outcome.table.roots().first().map(|s| s.to_string()).unwrap_or_default()
    } else {
        cfg.top_module.clone()
    };
    let keep: HashSet<String> = outcome.train.signals().into_iter().collect();
    let split = |s: Split| -> Vec<JobResult> { outcome.jobs.iter().filter(|r| r.job.split == s).cloned().collect() };
    let (train_jobs, test_jobs) = (split(Split::Train), split(Split::Test));
    let mut caps: Vec<usize> = caps.to_vec();
    caps.push(cfg.tick_cap);
    caps.sort_unstable();
    caps.dedup();
    let mut rows = Vec::new();
    for t in caps {
        if t == 0 {
            return Err(CliError::Usage("ablation tick caps must be positive".into()));
        }
        let settings = ExtractSettings {
            tick_cap: t,
            stats: cfg.stat_set()?,
            encoding: cfg.encoding,
            prune: PruneConfig::new(&cfg.dut_root, &top),
            target_signals: signals_for_targets(&outcome.table, &targets)?,
            instances: outcome.table.instances.clone(),
            workers: cfg.workers,
        };
        let (train, train_report) = run_data_pipeline(&train_jobs, &settings)?;
        let (test, test_report) = run_data_pipeline(&test_jobs, &settings)?;
        let (train, test) = (train.restrict_signals(&keep), test.restrict_signals(&keep));
        let model = ml::fit(ModelKind::Gbt, &train, &ModelParams::default(), model_seed(cfg.seed, ModelKind::Gbt))?;
        let r = ml::evaluate(&model, &test)?;
        rows.push(report::AblationRow {
            tick_cap: t,
            top1: r.top1,
            top3: r.top3,
            macro_f1: r.macro_f1,
            final_csv_bytes: train.to_csv_bytes().len() as u64,
            tick_capped: train_report.tick_capped.len() + test_report.tick_capped.len(),
        });
    }
    Ok(rows)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn report_cmd(
    cfg: &PipelineConfig,
    g: &Globals,
    metrics: &[PathBuf],
    stages: Option<&Path>,
    ablation: Option<&Path>,
    svg: Option<&Path>,
    out: Option<&Path>,
) -> Result<i32, CliError> {
    let mut m = manifest("report", cfg, g)?;
    let mut reports = Vec::new();
    for p in metrics {
        m.input(p)?;
        let name = p.file_stem().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        reports.push((name, read_json::<ml::MetricsReport>(p)?));
    }
    let stages = match stages {
        Some(p) => {
            m.input(p)?;
            Some(read_stages(p)?)
        }
        None => None,
    };
    let ablation = match ablation {
        Some(p) => {
            m.input(p)?;
            Some(read_json::<Vec<report::AblationRow>>(p)?)
        }
        None => None,
    };
    if let Some(p) = svg {
        write_bytes(p, reports[0].1.confusion_svg().as_bytes())?;
        m.output(p);
        if out.is_none() {
            m.write_beside(p)?;
        }
    }
    emit_text(&report::render(&reports, stages.as_ref(), ablation.as_deref()), out, &mut m)?;
    Ok(0)
}

/// Accepts both the pipeline's train/test pair and a single stage report.
fn read_stages(path: &Path) -> Result<StagesFile, CliError> {
    let value: serde_json::Value = read_json(path)?;
    if value.get("train").is_some() {
        return serde_json::from_value(value).map_err(|e| CliError::Data(format!("{}: {e}", path.display())));
    }
    let single: StageReport = serde_json::from_value(value).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(StagesFile { train: single, test: StageReport::default() })
}

fn difficulty(d: DifficultyArg) -> Difficulty {
    match d {
        DifficultyArg::Easy => Difficulty::Easy,
        DifficultyArg::Medium => Difficulty::Medium,
        DifficultyArg::Hard => Difficulty::Hard,
        DifficultyArg::Impossible => Difficulty::Impossible,
    }
}

fn fixture(cfg: &PipelineConfig, g: &Globals, f: FixtureCommand) -> Result<i32, CliError> {
    match f {
        FixtureCommand::Gen { modules, difficulty: d, replay_ticks, out } => {
            let mut m = manifest("fixture gen", cfg, g)?;
            let mut design = fixtures::gen_design(modules, cfg.seed)?;
            design.replay = ReplaySettings { difficulty: difficulty(d), ticks: replay_ticks };
            design.write(&out)?;
            m.output(&out).write_beside(&out)?;
            println!("{} modules, targets: {}", design.modules.len(), design.targets().join(","));
            Ok(0)
        }
        FixtureCommand::Corpus { design, per_module, ticks, difficulty: d, out } => {
            let mut m = manifest("fixture corpus", cfg, g)?;
            m.input(&design)?;
            let fd = FixtureDesign::load(&design)?;
            let entries = fixtures::gen_corpus(&fd, &out, per_module, ticks, cfg.seed, difficulty(d))?;
            m.output(&out).write_beside(&out)?;
            println!("{} dumps", entries.len());
            Ok(0)
        }
        FixtureCommand::Simulate { design_dir, vcd_out } => {
            let fd = fixtures::load_manifest(&design_dir)?;
            match fixtures::replay(&fd, &design_dir, cfg.seed, &vcd_out)? {
                SimOutcome::Pass => Ok(0),
                SimOutcome::Fail => Ok(1),
                SimOutcome::Crash => Err(CliError::External("replay crashed".into())),
            }
        }
        FixtureCommand::Check { stage, design_dir, pristine } => {
            let checker = FixtureChecker::new(&DesignSources::load_dir(&pristine)?.files);
            let outcome = match stage {
                CheckStage::Compile => checker.compile(&design_dir, "cli")?,
                CheckStage::Test => checker.test(&design_dir, "cli")?,
            };
            Ok(if outcome == CheckOutcome::Pass { 0 } else { 1 })
        }
    }
}
