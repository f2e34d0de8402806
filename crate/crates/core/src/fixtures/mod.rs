// SPDX-License-Identifier: Apache-2.0

//! Desk-scale test assets: generated designs, a replay simulator and
//! synthetic failing dumps with module-identifiable tail statistics.

mod check;
mod design;
mod replay;
mod wave;

pub use check::{compiles, dead_regions, separability_certificate, ClassSeparation, FixtureChecker, SeparabilityCertificate};
pub use design::{
    gen_design, Deviation, DeviationKind, Difficulty, FixtureDesign, FixtureInstance, FixtureModule, FixtureSignal, ReplaySettings,
    DEAD_MACRO, MANIFEST, TOP,
};
pub use replay::{load_manifest, replay, scenario_label, ReplaySimulator};
pub use wave::{gen_failing_vcd, signature_len, SIGNATURE_TICKS, TB_PROBES};

use crate::select::PruneConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("module count {0} is outside 2..=16")]
    BadModuleCount(usize),
    #[error("unknown module `{0}`")]
    UnknownModule(String),
    #[error("at least 50 ticks are required, got {0}")]
    TooFewTicks(usize),
    #[error("unknown difficulty `{0}`")]
    BadDifficulty(String),
    #[error("bad manifest: {0}")]
    Manifest(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Vcd(#[from] crate::vcd::VcdError),
}

impl FixtureError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        FixtureError::Io { path: path.to_path_buf(), source }
    }
}

/// Where fixture dumps place the design.
pub fn prune_config() -> PruneConfig {
    PruneConfig::new("tb.dut", TOP)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub file: PathBuf,
    pub label: String,
    pub seed: u64,
    pub difficulty: Difficulty,
}

/// `per_module` dumps for every target, written as `<label>-NNNN.vcd`
/// under `dir`, plus `manifest.json`.
pub fn gen_corpus(
    design: &FixtureDesign,
    dir: &Path,
    per_module: usize,
    ticks: usize,
    seed: u64,
    difficulty: Difficulty,
) -> Result<Vec<CorpusEntry>, FixtureError> {
    use rayon::prelude::*;
    std::fs::create_dir_all(dir).map_err(|e| FixtureError::io(dir, e))?;
    let mut entries = Vec::new();
    for label in design.targets() {
        for i in 0..per_module {
            let s = crate::seed::substream(seed, &format!("corpus/{label}"), i as u64);
            entries.push(CorpusEntry { file: PathBuf::from(format!("{label}-{i:04}.vcd")), label: label.clone(), seed: s, difficulty });
        }
    }
    entries.par_iter().try_for_each(|e| {
        let p = dir.join(&e.file);
        let f = std::fs::File::create(&p).map_err(|err| FixtureError::io(&p, err))?;
        gen_failing_vcd(design, &e.label, ticks, e.seed, e.difficulty, std::io::BufWriter::new(f))?
            .into_inner()
            .map_err(|err| FixtureError::io(&p, err.into_error()))?;
        Ok::<(), FixtureError>(())
    })?;
    let p = dir.join("manifest.json");
    std::fs::write(&p, serde_json::to_string_pretty(&entries).expect("manifest serializes") + "\n").map_err(|e| FixtureError::io(&p, e))?;
    Ok(entries)
}
