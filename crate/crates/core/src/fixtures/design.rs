// SPDX-License-Identifier: Apache-2.0

//! Generated multi-module SystemVerilog designs with known signal sets.

use super::FixtureError;
use crate::seed;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const TOP: &str = "fx_top";
/// Code under this macro is never compiled, so mutations there are ineffective.
pub const DEAD_MACRO: &str = "FX_UNUSED_DEBUG";
pub const MANIFEST: &str = "fixture.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
    Impossible,
}

impl Difficulty {
    /// Deviation scale applied to every signature.
    pub fn magnitude(self) -> f64 {
        match self {
            Difficulty::Easy => 1.0,
            Difficulty::Medium => 0.5,
            Difficulty::Hard => 0.2,
            Difficulty::Impossible => 0.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
            Difficulty::Impossible => "impossible",
        }
    }
}

impl FromStr for Difficulty {
    type Err = FixtureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard, Difficulty::Impossible]
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| FixtureError::BadDifficulty(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationKind {
    /// Mean shifted upward.
    BiasShift,
    /// Held high for a growing share of ticks.
    StuckAt,
    /// Variance inflated and updated every tick.
    VarianceToggle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deviation {
    pub signal: String,
    pub kind: DeviationKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureSignal {
    pub name: String,
    pub width: u32,
    /// Registers start as `x` until reset.
    pub register: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureInstance {
    pub name: String,
    pub module: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureModule {
    pub name: String,
    pub file: PathBuf,
    /// Live (compiled) signals, in declaration order.
    pub signals: Vec<FixtureSignal>,
    pub instances: Vec<FixtureInstance>,
    pub target: bool,
    /// Deviations visible in failing runs labelled with this module.
    pub signature: Vec<Deviation>,
}

/// Settings the replay simulator reads from the manifest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplaySettings {
    pub difficulty: Difficulty,
    pub ticks: usize,
}

impl Default for ReplaySettings {
    fn default() -> Self {
        ReplaySettings { difficulty: Difficulty::Easy, ticks: 2100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureDesign {
    pub seed: u64,
    pub top: String,
    pub modules: Vec<FixtureModule>,
    #[serde(default)]
    pub replay: ReplaySettings,
    #[serde(skip)]
    pub sources: Vec<(PathBuf, String)>,
}

impl FixtureDesign {
    pub fn module(&self, name: &str) -> Option<&FixtureModule> {
        self.modules.iter().find(|m| m.name == name)
    }

    pub fn targets(&self) -> Vec<String> {
        self.modules.iter().filter(|m| m.target).map(|m| m.name.clone()).collect()
    }

    /// Every instance below (and including) the top: `(scope path under the
    /// DUT, module)`, depth-first.
    pub fn instance_paths(&self) -> Vec<(Vec<String>, String)> {
        fn walk(d: &FixtureDesign, module: &str, path: Vec<String>, out: &mut Vec<(Vec<String>, String)>) {
            out.push((path.clone(), module.to_string()));
            if let Some(m) = d.module(module) {
                for i in &m.instances {
                    let mut p = path.clone();
                    p.push(i.name.clone());
                    walk(d, &i.module, p, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &self.top, Vec::new(), &mut out);
        out
    }

    /// Write sources and the manifest into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), FixtureError> {
        fs::create_dir_all(dir).map_err(|e| FixtureError::io(dir, e))?;
        for (file, text) in &self.sources {
            let p = dir.join(file);
            fs::write(&p, text).map_err(|e| FixtureError::io(&p, e))?;
        }
        let p = dir.join(MANIFEST);
        let json = serde_json::to_string_pretty(self).expect("design serializes");
        fs::write(&p, json + "\n").map_err(|e| FixtureError::io(&p, e))
    }

    /// Read a design written by [`FixtureDesign::write`].
    pub fn load(dir: &Path) -> Result<Self, FixtureError> {
        let p = dir.join(MANIFEST);
        let text = fs::read_to_string(&p).map_err(|e| FixtureError::io(&p, e))?;
        let mut d: FixtureDesign = serde_json::from_str(&text).map_err(|e| FixtureError::Manifest(e.to_string()))?;
        for m in &d.modules {
            let p = dir.join(&m.file);
            let text = fs::read_to_string(&p).map_err(|e| FixtureError::io(&p, e))?;
            d.sources.push((m.file.clone(), text));
        }
        Ok(d)
    }
}

struct Shape {
    reg8: &'static str,
    comb8: &'static str,
    flag: &'static str,
    counter: Option<&'static str>,
    err: Option<&'static str>,
    op: &'static str,
    mask: u8,
}

fn render_module(name: &str, shape: &Shape, instances: &[FixtureInstance]) -> String {
    let Shape { reg8, comb8, flag, op, mask, .. } = *shape;
    let mut s = String::new();
    let _ = writeln!(s, "module {name} (");
    s.push_str("  input  logic       clk,\n  input  logic       rst_n,\n  input  logic [7:0] din,\n  output logic [7:0] dout\n);\n");
    let _ = writeln!(s, "  logic [7:0] {reg8};\n  logic [7:0] {comb8};\n  logic       {flag};");
    if let Some(c) = shape.counter {
        let _ = writeln!(s, "  logic [7:0] {c};");
    }
    if let Some(e) = shape.err {
        let _ = writeln!(s, "  logic       {e};");
    }
    s.push('\n');
    let _ = writeln!(s, "  assign {comb8} = din {op} {reg8};");
    let _ = writeln!(s, "  assign {flag} = {comb8}[0] | din[7];");
    let _ = writeln!(s, "  assign dout = {comb8} & 8'h{mask:02x} | {reg8};");
    s.push_str("\n  always_ff @(posedge clk) begin\n");
    let _ = writeln!(s, "    if (!rst_n) {reg8} <= 8'd0;");
    let _ = writeln!(s, "    else if ({flag}) {reg8} <= {reg8} + din;");
    let _ = writeln!(s, "    else {reg8} <= ~{reg8};");
    s.push_str("  end\n");
    if let Some(c) = shape.counter {
        s.push_str("\n  always_ff @(posedge clk or negedge rst_n) begin\n");
        let _ = writeln!(s, "    if (!rst_n)\n      {c} <= 8'd0;\n    else\n      {c} <= {c} + 8'd1;");
        s.push_str("  end\n");
    }
    if let Some(e) = shape.err {
        let src = shape.counter.unwrap_or(reg8);
        let _ = writeln!(s, "\n  assign {e} = {src}[7] & {flag};");
    }
    let _ = writeln!(s, "\n`ifdef {DEAD_MACRO}\n  logic [7:0] dbg;\n  assign dbg = {reg8} ^ din;\n`endif");
    for i in instances {
        let _ = writeln!(s, "\n  {} {} (.clk(clk), .rst_n(rst_n), .din({comb8}), .dout());", i.module, i.name);
    }
    s.push_str("endmodule\n");
    s
}

/// A design of `n_modules` modules: `fx_top`, `n_modules - 2` further
/// targets and one non-target sibling `fx_aux`. Hierarchy is two or three
/// levels; with four or more modules the last target is instantiated twice.
pub fn gen_design(n_modules: usize, seed_value: u64) -> Result<FixtureDesign, FixtureError> {
    if !(2..=16).contains(&n_modules) {
        return Err(FixtureError::BadModuleCount(n_modules));
    }
    let mut rng = seed::rng(seed_value, "fixture.design", 0);
    let inner = n_modules - 2;
    let mut names = vec![TOP.to_string()];
    names.extend((1..=inner).map(|i| format!("fx_m{i}")));
    names.push("fx_aux".to_string());

    // level-2 modules hang off the top; the rest under a level-2 module
    let level2 = inner.div_ceil(2);
    let mut children: Vec<Vec<FixtureInstance>> = vec![Vec::new(); n_modules];
    for i in 1..=inner {
        let parent = if i <= level2 { 0 } else { rng.gen_range(1..=level2) };
        let copies = if inner >= 2 && i == inner { 2 } else { 1 };
        for k in 0..copies {
            children[parent].push(FixtureInstance { name: format!("u_{}_{k}", &names[i][3..]), module: names[i].clone() });
        }
    }
    children[0].push(FixtureInstance { name: "u_aux_0".into(), module: "fx_aux".into() });

    let ops = ["^", "&", "|"];
    let mut modules = Vec::with_capacity(n_modules);
    let mut sources = Vec::with_capacity(n_modules);
    for (idx, name) in names.iter().enumerate() {
        let pools: [&[&str]; 3] = [&["acc", "state", "buf_q"], &["mix", "sum", "nxt"], &["flag", "hit", "sel"]];
        let pick = |rng: &mut rand_chacha::ChaCha8Rng, p: &[&'static str]| *p.choose(rng).expect("non-empty pool");
        let shape = Shape {
            reg8: pick(&mut rng, pools[0]),
            comb8: pick(&mut rng, pools[1]),
            flag: pick(&mut rng, pools[2]),
            counter: rng.gen_bool(0.6).then_some("cnt"),
            err: rng.gen_bool(0.5).then_some("err"),
            op: ops[rng.gen_range(0..ops.len())],
            mask: rng.gen_range(1..=255),
        };
        let file = PathBuf::from(format!("{name}.sv"));
        sources.push((file.clone(), render_module(name, &shape, &children[idx])));
        let mut signals = vec![
            FixtureSignal { name: "clk".into(), width: 1, register: false },
            FixtureSignal { name: "rst_n".into(), width: 1, register: false },
            FixtureSignal { name: "din".into(), width: 8, register: false },
            FixtureSignal { name: "dout".into(), width: 8, register: false },
            FixtureSignal { name: shape.reg8.into(), width: 8, register: true },
            FixtureSignal { name: shape.comb8.into(), width: 8, register: false },
            FixtureSignal { name: shape.flag.into(), width: 1, register: false },
        ];
        if let Some(c) = shape.counter {
            signals.push(FixtureSignal { name: c.into(), width: 8, register: true });
        }
        if let Some(e) = shape.err {
            signals.push(FixtureSignal { name: e.into(), width: 1, register: false });
        }
        let signature = vec![
            Deviation { signal: shape.reg8.into(), kind: DeviationKind::BiasShift },
            Deviation { signal: shape.comb8.into(), kind: DeviationKind::VarianceToggle },
            Deviation { signal: shape.flag.into(), kind: DeviationKind::StuckAt },
        ];
        modules.push(FixtureModule {
            name: name.clone(),
            file,
            signals,
            instances: children[idx].clone(),
            target: idx + 1 < n_modules,
            signature,
        });
    }
    Ok(FixtureDesign { seed: seed_value, top: TOP.to_string(), modules, replay: ReplaySettings::default(), sources })
}
