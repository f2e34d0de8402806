// SPDX-License-Identifier: Apache-2.0

//! Synthetic failing dumps. Baseline signals share one stochastic recipe;
//! the labelled module's signature signals deviate over the final window.

use super::design::{DeviationKind, Difficulty, FixtureDesign, FixtureSignal};
use super::FixtureError;
use crate::seed;
use crate::vcd::{id_code_for, Bit, Scope, ScopeItem, ScopeTree, SignalDecl, TimeUnit, Timescale, Value, VarKind, VcdWriter};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::io::Write;

/// Testbench-level probes outside the DUT.
pub const TB_PROBES: usize = 2;
/// Ticks before reset releases.
const RESET_TICKS: usize = 3;
/// Instances per run with a nuisance variance burst, and its scale.
const DISTRACTED: usize = 3;
const BURST_SCALE: f64 = 3.5;
/// Deviations cover at most this many final ticks.
pub const SIGNATURE_TICKS: usize = 400;

/// Final-window length for a dump of `ticks` ticks.
pub fn signature_len(ticks: usize) -> usize {
    SIGNATURE_TICKS.min(ticks / 2)
}

#[derive(Debug, Clone, Copy)]
enum Recipe {
    Clock,
    Reset,
    /// Sample-and-hold of an AR(1) process around `128`.
    Byte { register: bool },
    /// Random toggling.
    Bit,
}

struct Track {
    id: String,
    width: u32,
    recipe: Recipe,
    deviation: Option<DeviationKind>,
    /// Extra variance burst unrelated to the label.
    distract: bool,
    ar: f64,
    value: Option<u64>,
}

fn recipe_of(s: &FixtureSignal) -> Recipe {
    match (s.name.as_str(), s.width) {
        ("clk", _) => Recipe::Clock,
        ("rst_n", _) => Recipe::Reset,
        (_, 1) => Recipe::Bit,
        _ => Recipe::Byte { register: s.register },
    }
}

impl Track {
    /// Next value at tick `t`; `None` keeps the register unknown.
    fn step(&mut self, rng: &mut ChaCha8Rng, t: usize, window_start: usize, mag: f64) -> Option<u64> {
        let in_window = t >= window_start;
        let dev = if in_window { self.deviation } else { None };
        match self.recipe {
            Recipe::Clock => Some((t % 2) as u64),
            Recipe::Reset => Some(u64::from(t >= RESET_TICKS)),
            Recipe::Byte { register } => {
                if register && t < RESET_TICKS {
                    return None;
                }
                let noise: f64 = rng.gen::<f64>() * 2.0 - 1.0;
                self.ar = 0.8 * self.ar + noise * 1.7;
                let mut scale = 20.0;
                let mut update = 0.35;
                if dev == Some(DeviationKind::VarianceToggle) {
                    scale *= 1.0 + 2.5 * mag;
                    update += 0.65 * mag;
                }
                if self.distract && in_window {
                    scale *= BURST_SCALE;
                }
                if self.value.is_some() && rng.gen::<f64>() >= update {
                    return self.value;
                }
                let mut v = 128.0 + scale * self.ar;
                if dev == Some(DeviationKind::BiasShift) {
                    v += 60.0 * mag;
                }
                Some(v.round().clamp(0.0, 255.0) as u64)
            }
            Recipe::Bit => {
                if dev == Some(DeviationKind::StuckAt) && rng.gen::<f64>() < 0.8 * mag {
                    return Some(1);
                }
                let cur = self.value.unwrap_or(0);
                Some(if rng.gen::<f64>() < 0.2 { cur ^ 1 } else { cur })
            }
        }
    }
}

fn value_of(v: Option<u64>, width: u32) -> Value {
    match (v, width) {
        (None, 1) => Value::Scalar(Bit::X),
        (None, w) => Value::Vector(vec![Bit::X; w as usize]),
        (Some(b), 1) => Value::Scalar(if b == 1 { Bit::One } else { Bit::Zero }),
        (Some(x), w) => Value::from_u64(x, w),
    }
}

/// Emit a failing dump labelled `label` into `out`. Scopes are `tb` (with
/// probes) and `tb.dut` for the top instance.
pub fn gen_failing_vcd<W: Write>(
    design: &FixtureDesign,
    label: &str,
    ticks: usize,
    seed_value: u64,
    difficulty: Difficulty,
    out: W,
) -> Result<W, FixtureError> {
    let label_module = design.module(label).ok_or_else(|| FixtureError::UnknownModule(label.to_string()))?;
    if ticks < 50 {
        return Err(FixtureError::TooFewTicks(ticks));
    }
    let mut rng = seed::rng(seed_value, "fixture.vcd", 0);
    let mag = difficulty.magnitude();
    let instances = design.instance_paths();
    // label-independent variance bursts on a few random instances
    let distracted: Vec<usize> = rand::seq::index::sample(&mut rng, instances.len(), DISTRACTED.min(instances.len())).into_vec();

    let mut tracks: Vec<Track> = Vec::new();
    let decl = |name: &str, width: u32, scope_path: &[String], tracks: &mut Vec<Track>, recipe, deviation, distract| {
        let id = id_code_for(tracks.len());
        tracks.push(Track { id: id.clone(), width, recipe, deviation, distract, ar: 0.0, value: None });
        ScopeItem::Var(SignalDecl { id_code: id, name: name.to_string(), width, kind: VarKind::Wire, scope_path: scope_path.to_vec() })
    };

    let mut tb = Scope::new("module", "tb");
    let tb_path = vec!["tb".to_string()];
    for p in 0..TB_PROBES {
        tb.items.push(decl(&format!("tb_mon_{p}"), 8, &tb_path, &mut tracks, Recipe::Byte { register: false }, None, false));
    }

    fn build(
        design: &FixtureDesign,
        module: &str,
        scope: &mut Scope,
        path: &[String],
        label: &str,
        counter: &mut usize,
        distracted: &[usize],
        emit: &mut dyn FnMut(&FixtureSignal, &[String], Option<DeviationKind>, bool) -> ScopeItem,
    ) {
        let m = design.module(module).expect("instances name known modules");
        let this = *counter;
        *counter += 1;
        for s in &m.signals {
            let dev = if module == label { m.signature.iter().find(|d| d.signal == s.name).map(|d| d.kind) } else { None };
            let distract = distracted.contains(&this) && s.width > 1 && !matches!(s.name.as_str(), "din" | "dout");
            scope.items.push(emit(s, path, dev, distract));
        }
        for i in &m.instances {
            let mut child = Scope::new("module", i.name.as_str());
            let mut p = path.to_vec();
            p.push(i.name.clone());
            build(design, &i.module, &mut child, &p, label, counter, distracted, emit);
            scope.items.push(ScopeItem::Scope(child));
        }
    }

    let mut dut = Scope::new("module", "dut");
    let dut_path = vec!["tb".to_string(), "dut".to_string()];
    let mut counter = 0;
    {
        let mut emit = |s: &FixtureSignal, path: &[String], dev: Option<DeviationKind>, distract: bool| {
            decl(&s.name, s.width, path, &mut tracks, recipe_of(s), dev, distract)
        };
        build(design, &design.top, &mut dut, &dut_path, &label_module.name, &mut counter, &distracted, &mut emit);
    }
    tb.items.push(ScopeItem::Scope(dut));
    let tree = ScopeTree { timescale: Timescale::new(1, TimeUnit::Ns).expect("valid timescale"), roots: vec![tb] };

    let mut w = VcdWriter::new(out, &tree)?;
    let window_start = ticks - signature_len(ticks);
    for t in 0..ticks {
        w.timestamp(t as u64)?;
        for tr in tracks.iter_mut() {
            let next = tr.step(&mut rng, t, window_start, mag);
            if t == 0 || next != tr.value {
                w.value(t as u64, &tr.id, &value_of(next, tr.width))?;
                tr.value = next;
            }
        }
    }
    Ok(w.finish()?)
}
