// SPDX-License-Identifier: Apache-2.0

//! The replay simulator: a failing run emits the synthetic dump for the
//! scenario's label instead of simulating anything.

use super::design::{FixtureDesign, MANIFEST};
use super::wave::gen_failing_vcd;
use super::FixtureError;
use crate::mutate::{BugScenario, ScenarioStatus};
use crate::orchestrate::{OrchestrateError, SimOutcome, Simulator, SCENARIO_FILE};
use std::io::BufWriter;
use std::path::Path;

/// The label of the accepted scenario recorded in `design_dir`, if any.
pub fn scenario_label(design_dir: &Path) -> Result<Option<String>, FixtureError> {
    let p = design_dir.join(SCENARIO_FILE);
    let text = match std::fs::read_to_string(&p) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(FixtureError::io(&p, e)),
    };
    let s: BugScenario = serde_json::from_str(&text).map_err(|e| FixtureError::Manifest(e.to_string()))?;
    Ok((s.status == ScenarioStatus::Accepted).then_some(s.label))
}

/// Run one replay: `Fail` with a dump when the design carries an accepted
/// bug, `Pass` otherwise.
pub fn replay(design: &FixtureDesign, design_dir: &Path, seed: u64, vcd_out: &Path) -> Result<SimOutcome, FixtureError> {
    let Some(label) = scenario_label(design_dir)? else { return Ok(SimOutcome::Pass) };
    let f = std::fs::File::create(vcd_out).map_err(|e| FixtureError::io(vcd_out, e))?;
    let w = BufWriter::with_capacity(1 << 16, f);
    gen_failing_vcd(design, &label, design.replay.ticks, seed, design.replay.difficulty, w)?
        .into_inner()
        .map_err(|e| FixtureError::io(vcd_out, e.into_error()))?;
    Ok(SimOutcome::Fail)
}

/// In-process replay simulator over a loaded design.
#[derive(Debug, Clone)]
pub struct ReplaySimulator {
    pub design: FixtureDesign,
}

impl Simulator for ReplaySimulator {
    fn simulate(&self, design_dir: &Path, _: &str, seed: u64, vcd_out: &Path) -> Result<SimOutcome, OrchestrateError> {
        replay(&self.design, design_dir, seed, vcd_out).map_err(|e| OrchestrateError::Io(e.to_string()))
    }
}

/// Load only the manifest (no sources) from a design directory.
pub fn load_manifest(design_dir: &Path) -> Result<FixtureDesign, FixtureError> {
    let p = design_dir.join(MANIFEST);
    let text = std::fs::read_to_string(&p).map_err(|e| FixtureError::io(&p, e))?;
    serde_json::from_str(&text).map_err(|e| FixtureError::Manifest(e.to_string()))
}
