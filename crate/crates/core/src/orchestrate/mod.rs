// SPDX-License-Identifier: Apache-2.0

//! Parallel scenario dispatch and the dump-to-dataset pipeline.

mod config;
mod dispatch;
mod pipeline;

pub use config::{PipelineConfig, SimulatorTemplates};
pub use dispatch::{
    dispatch, CommandSimulator, JobContext, JobResult, JobStatus, ScenarioJob, ScratchRegistry, SimOutcome, Simulator, Split,
    SCENARIO_FILE,
};
pub use pipeline::{
    extract_dataset, reduce_to_limit, run_data_pipeline, run_pipeline, scenario_jobs, ExtractSettings, PipelineOutcome, StageReport, WaveInput,
};

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OrchestrateError {
    #[error("simulator not found: {0}")]
    SimulatorNotFound(String),
    #[error("scratch directory {0} is already claimed by another job")]
    ScratchCollision(PathBuf),
    #[error("no failing waveforms to process")]
    NoFailingWaveforms,
    #[error("simulator crashed on {0}")]
    SimulatorCrashed(String),
    #[error("worker panicked on {0}")]
    WorkerPanicked(String),
    #[error("invalid pipeline config: {0}")]
    Config(String),
    #[error("mutation: {0}")]
    Mutate(String),
    #[error("extraction: {0}")]
    Extract(String),
    #[error("rtl: {0}")]
    Rtl(String),
    #[error("i/o: {0}")]
    Io(String),
}
