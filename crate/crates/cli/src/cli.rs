// SPDX-License-Identifier: Apache-2.0

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

/// Failure triage from regression waveforms: localize a failing test to the
/// RTL module most likely responsible.
///
/// Shared options resolve with precedence flag > environment > config file
/// > built-in default. Each has a `WAVETRIAGE_*` environment variable.
///
/// Exit status: 0 success, 1 usage error, 2 data error, 3 external command failure.
#[derive(Debug, Parser)]
#[command(name = "wavetriage", version, propagate_version = true)]
pub struct Cli {
    #[command(flatten)]
    pub globals: Globals,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Globals {
    /// Pipeline config (JSON). Supplies values for every option not given
    /// on the command line or in the environment.
    #[arg(long, global = true, env = "WAVETRIAGE_CONFIG", value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Root seed; every random stream is derived from it.
    #[arg(long, global = true, env = "WAVETRIAGE_SEED")]
    pub seed: Option<u64>,
    /// Worker threads for dispatch and extraction.
    #[arg(long, global = true, env = "WAVETRIAGE_WORKERS")]
    pub workers: Option<usize>,
    /// Window length: distinct timestamps kept before the failure.
    #[arg(long, global = true, env = "WAVETRIAGE_TICK_CAP", value_name = "T")]
    pub tick_cap: Option<usize>,
    /// Comma-separated statistics, e.g. `mean,std,min,max,q50`.
    #[arg(long, global = true, env = "WAVETRIAGE_STATS")]
    pub stats: Option<String>,
    /// Fraction of signals kept per reduction iteration (0.5 to 0.7).
    #[arg(long, global = true, env = "WAVETRIAGE_KEEP_FRACTION", value_name = "P")]
    pub keep_fraction: Option<f64>,
    /// Signal count above which reduction runs.
    #[arg(long, global = true, env = "WAVETRIAGE_MAX_SIGNALS")]
    pub max_signals: Option<usize>,
}

/// Where the design lives and which modules are labels.
#[derive(Debug, Clone, Args)]
pub struct DesignArgs {
    /// RTL source files or directories (`.v`/`.sv`, searched recursively).
    #[arg(long, required = true, num_args = 1..)]
    pub sources: Vec<PathBuf>,
    /// Comma-separated label modules. Default: config targets, else every module.
    #[arg(long, value_delimiter = ',')]
    pub targets: Vec<String>,
    /// Scope path of the DUT instance in the dumps. Default: config `dut_root`.
    #[arg(long)]
    pub dut_root: Option<String>,
    /// Module the DUT instance instantiates. Default: config `top_module`,
    /// else the single root of the design.
    #[arg(long)]
    pub top: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan RTL sources into the module lookup table (JSON).
    Scan {
        /// RTL source files or directories.
        #[arg(long, required = true, num_args = 1..)]
        sources: Vec<PathBuf>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Select the target-owned signals of one dump (JSON report).
    Select {
        #[arg(long)]
        vcd: PathBuf,
        #[command(flatten)]
        design: DesignArgs,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the failure window of one dump as a per-tick CSV.
    Extract {
        #[arg(long)]
        vcd: PathBuf,
        #[command(flatten)]
        design: DesignArgs,
        /// Label recorded with the window.
        #[arg(long, default_value = "unknown")]
        label: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize labelled dumps into a feature dataset CSV.
    Compress {
        /// Corpus manifest: JSON list of `{file, label, ...}` entries, with
        /// files relative to the manifest.
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        design: DesignArgs,
        /// Keep only the signals present in this dataset (e.g. a reduced
        /// training set) instead of running reduction.
        #[arg(long)]
        restrict_to: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a classifier on a dataset CSV.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "gbt")]
        kind: Kind,
        /// Hyperparameters (JSON, any subset of the model parameter fields).
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a model on a held-out dataset.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Metrics report output (JSON).
        #[arg(long)]
        json: PathBuf,
    },
    /// Inject one bug scenario into a copy of a design.
    Inject {
        #[arg(long)]
        design_dir: PathBuf,
        /// Module to mutate; it becomes the scenario label.
        #[arg(long)]
        module: String,
        /// Bug types, one patch each. Repeatable.
        #[arg(long = "bug-type", required = true)]
        bug_types: Vec<String>,
        #[arg(long, default_value = "manual-0000")]
        scenario_id: String,
        /// Attempts before giving up. Default: config `mutation_attempts`.
        #[arg(long)]
        attempts: Option<u32>,
        /// Directory receiving the mutated design copy.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Inject, simulate, extract, train and evaluate end to end.
    Pipeline {
        /// Output directory for datasets, models, metrics and reports.
        #[arg(long)]
        out: PathBuf,
        /// Models to train.
        #[arg(long, value_enum, value_delimiter = ',', default_value = "knn,random-forest,gbt")]
        models: Vec<Kind>,
        /// Extra window lengths for a tick-cap ablation of the boosted model.
        #[arg(long, value_delimiter = ',')]
        ablation: Vec<usize>,
    },
    /// Render metrics, stage sizes and ablations as text.
    Report {
        /// Metrics JSON files. Repeatable.
        #[arg(long, required = true)]
        metrics: Vec<PathBuf>,
        /// Stage report JSON from `pipeline` or `compress`.
        #[arg(long)]
        stages: Option<PathBuf>,
        /// Ablation JSON from `pipeline --ablation`.
        #[arg(long)]
        ablation: Option<PathBuf>,
        /// Write a confusion heatmap of the first metrics file.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Text output; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthetic designs, dumps and a replay simulator for testing.
    #[command(subcommand)]
    Fixture(FixtureCommand),
}

#[derive(Debug, Subcommand)]
pub enum FixtureCommand {
    /// Generate a multi-module design with its manifest.
    Gen {
        #[arg(long, default_value_t = 9)]
        modules: usize,
        #[arg(long, value_enum, default_value = "easy")]
        difficulty: DifficultyArg,
        /// Length of replayed failing dumps.
        #[arg(long, default_value_t = 2100)]
        replay_ticks: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate labelled failing dumps for every target module.
    Corpus {
        #[arg(long)]
        design: PathBuf,
        #[arg(long, default_value_t = 10)]
        per_module: usize,
        #[arg(long, default_value_t = 2100)]
        ticks: usize,
        #[arg(long, value_enum, default_value = "easy")]
        difficulty: DifficultyArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay simulator. Exit 0 when the design carries no accepted bug,
    /// exit 1 with a dump at `--vcd-out` when it does.
    Simulate {
        #[arg(long)]
        design_dir: PathBuf,
        #[arg(long)]
        vcd_out: PathBuf,
    },
    /// Compile or test check of a mutated fixture copy. Exit 0 pass, 1 fail.
    Check {
        #[arg(value_enum)]
        stage: CheckStage,
        #[arg(long)]
        design_dir: PathBuf,
        /// Unmodified design the copy was made from.
        #[arg(long)]
        pristine: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Knn,
    #[value(alias = "rf", alias = "random_forest")]
    RandomForest,
    Gbt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DifficultyArg {
    Easy,
    Medium,
    Hard,
    Impossible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckStage {
    Compile,
    Test,
}
