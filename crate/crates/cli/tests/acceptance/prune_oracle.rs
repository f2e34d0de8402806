// SPDX-License-Identifier: Apache-2.0

//! Criterion 6: signal pruning against a text-search oracle that never
//! touches the RTL scanner.

use crate::{serial, verdict};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};
use wavetriage_core::fixtures::{gen_design, gen_failing_vcd, prune_config, Difficulty};
use wavetriage_core::rtl::{scan_sources, signals_for_targets, DesignSources};
use wavetriage_core::select::prune;
use wavetriage_core::seed;
use wavetriage_core::vcd::{list_full_names, parse_header};

const DESIGNS: u64 = 50;
const TYPES: [&str; 5] = ["logic", "wire", "reg", "integer", "bit"];

/// Body text of every `module <name> ... endmodule` block.
fn module_bodies(sources: &[(std::path::PathBuf, String)]) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for (_, text) in sources {
        let mut rest = text.as_str();
        while let Some(at) = rest.find("module ") {
            let after = &rest[at + "module ".len()..];
            let name: String = after.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
            let end = after.find("endmodule").map_or(after.len(), |e| e);
            out.insert(name, after[..end].to_string());
            rest = &after[end..];
            if let Some(skip) = rest.strip_prefix("endmodule") {
                rest = skip;
            }
        }
    }
    out
}

/// Names declared on lines shaped `[direction] type [range] name ...`.
fn declared(body: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for line in body.lines() {
        let mut words = line.split_whitespace().peekable();
        if matches!(words.peek(), Some(&("input" | "output" | "inout"))) {
            words.next();
        }
        if !words.next().is_some_and(|w| TYPES.contains(&w)) {
            continue;
        }
        let rest: String = words.collect::<Vec<_>>().join(" ");
        let mut rest = rest.as_str();
        while let Some(r) = rest.strip_prefix('[') {
            rest = r.split_once(']').map_or("", |(_, after)| after).trim_start();
        }
        let name: String = rest.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
        if !name.is_empty() {
            out.insert(name);
        }
    }
    out
}

/// `instance name -> module` from lines shaped `<known module> <name> (`.
fn instances(body: &str, known: &BTreeSet<String>) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for line in body.lines() {
        let mut words = line.split_whitespace();
        let (Some(m), Some(inst)) = (words.next(), words.next()) else { continue };
        if known.contains(m) {
            let inst: String = inst.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
            out.insert(inst, m.to_string());
        }
    }
    out
}

#[test]
fn criterion_6_prune_soundness() {
    let _g = serial();
    let (mut false_in, mut false_out, mut selected_total, mut offered_total) = (0usize, 0usize, 0usize, 0usize);
    for i in 0..DESIGNS {
        let mut rng = seed::rng(17, "acceptance.prune", i);
        let n = rng.gen_range(5..=12);
        let design = gen_design(n, 1000 + i).unwrap();
        let mut all: Vec<String> = design.modules.iter().map(|m| m.name.clone()).collect();
        all.shuffle(&mut rng);
        let k = rng.gen_range(1..=all.len());
        let targets: BTreeSet<String> = all[..k].iter().cloned().collect();
        let label = design.targets()[rng.gen_range(0..design.targets().len())].clone();
        let bytes = gen_failing_vcd(&design, &label, 60, i, Difficulty::Easy, Vec::new()).unwrap();
        let (tree, _) = parse_header(&bytes[..]).unwrap();
        let names = list_full_names(&tree);

        let table = scan_sources(&DesignSources { files: design.sources.clone() }).unwrap();
        let report = prune(&names, &signals_for_targets(&table, &targets).unwrap(), &table.instances, &prune_config()).unwrap();
        let got: BTreeSet<String> = report.names().into_iter().collect();

        let bodies = module_bodies(&design.sources);
        let known: BTreeSet<String> = bodies.keys().cloned().collect();
        let expected: BTreeSet<String> = names
            .iter()
            .filter_map(|(full, _, _)| {
                let parts: Vec<&str> = full.split('.').collect();
                let (leaf, scopes) = parts.split_last()?;
                let under = scopes.strip_prefix(&["tb", "dut"][..])?;
                let mut module = design.top.clone();
                for inst in under {
                    module = instances(&bodies[&module], &known).get(*inst)?.clone();
                }
                (targets.contains(&module) && declared(&bodies[&module]).contains(*leaf)).then(|| full.clone())
            })
            .collect();
        false_in += got.difference(&expected).count();
        false_out += expected.difference(&got).count();
        selected_total += expected.len();
        offered_total += names.len();
    }
    let pass = false_in == 0 && false_out == 0 && selected_total > 0;
    let detail = format!("{DESIGNS} designs, {offered_total} dumped signals, {selected_total} expected selections; {false_in} false inclusions, {false_out} false exclusions");
    verdict(6, "prune soundness", pass, &detail);
    assert!(pass, "{detail}");
}
