// SPDX-License-Identifier: Apache-2.0

//! Criterion 7: reversibility, rulebook conformance and cache replay of the
//! injection loop.

use crate::{serial, verdict};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use wavetriage_core::fixtures::{gen_design, FixtureChecker, FixtureDesign};
use wavetriage_core::mutate::{
    conforms, inject_scenario, revert_all, BugType, CheckOutcome, Checker, FailureLog, InjectRequest, MutateError, MutationCache,
    MutationSpec, RulePlanner, ScenarioStatus,
};
use wavetriage_core::rtl::{scan_sources, DesignSources};
use wavetriage_core::seed;

const SCENARIOS: usize = 100;

fn snapshot(dir: &Path, design: &FixtureDesign) -> BTreeMap<PathBuf, Vec<u8>> {
    design.sources.iter().map(|(f, _)| (f.clone(), std::fs::read(dir.join(f)).unwrap())).collect()
}

fn pristine(design: &FixtureDesign) -> BTreeMap<PathBuf, Vec<u8>> {
    design.sources.iter().map(|(f, t)| (f.clone(), t.as_bytes().to_vec())).collect()
}

/// Wraps the fixture checker and verifies, at every compile, that exactly
/// one file differs from pristine: earlier rejected attempts were undone.
struct Watch<'a> {
    inner: FixtureChecker,
    design: &'a FixtureDesign,
    checks: AtomicUsize,
    dirty: AtomicUsize,
}

impl Checker for Watch<'_> {
    fn compile(&self, dir: &Path, id: &str) -> Result<CheckOutcome, MutateError> {
        let now = snapshot(dir, self.design);
        let changed = pristine(self.design).iter().filter(|(f, b)| now[*f] != **b).count();
        self.checks.fetch_add(1, Ordering::Relaxed);
        if changed != 1 {
            self.dirty.fetch_add(1, Ordering::Relaxed);
        }
        self.inner.compile(dir, id)
    }

    fn test(&self, dir: &Path, id: &str) -> Result<CheckOutcome, MutateError> {
        self.inner.test(dir, id)
    }
}

fn strip_comment(rep: &str) -> Option<String> {
    if let Some(inner) = rep.strip_prefix("/* ").and_then(|r| r.strip_suffix(" */")) {
        return Some(inner.to_string());
    }
    let lines: Option<Vec<&str>> = rep.split('\n').map(|l| l.strip_prefix("// ")).collect();
    lines.map(|l| l.join("\n"))
}

/// Byte-level restatement of the rewrite rules, independent of the lexer.
fn rule_holds(s: &MutationSpec) -> bool {
    let (o, r) = (s.site.original.as_str(), s.replacement.as_str());
    match s.bug_type {
        BugType::MissingAssignment => strip_comment(r).as_deref() == Some(o) && (o.contains("<=") || o.contains('=')),
        BugType::WrongAssignment => {
            let literal = |x: &str| match x.split_once("'d") {
                Some((w, v)) => w.parse::<u32>().is_ok() && v.parse::<u64>().is_ok(),
                None => x.parse::<u64>().is_ok(),
            };
            let ident = r.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') && r.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            r != o && (literal(r) || ident)
        }
        BugType::BitwiseCorruption => {
            let ops = |c: u8| matches!(c, b'&' | b'|' | b'^');
            let (ob, rb) = (o.as_bytes(), r.as_bytes());
            if ob.len() == rb.len() {
                let diff: Vec<usize> = (0..ob.len()).filter(|&i| ob[i] != rb[i]).collect();
                diff.len() == 1 && ops(ob[diff[0]]) && ops(rb[diff[0]])
            } else {
                ob.len() == rb.len() + 1 && (0..ob.len()).any(|i| ob[i] == b'~' && ob[..i] == rb[..i] && ob[i + 1..] == rb[i..])
            }
        }
        BugType::LogicBug => {
            (o == "posedge" && r == "negedge")
                || (o == "negedge" && r == "posedge")
                || o.strip_prefix('(').and_then(|x| x.strip_suffix(')')).is_some_and(|c| r == format!("(!({c}))"))
        }
        BugType::DataSize => {
            let parse = |x: &str| -> Option<(i64, i64)> {
                let (m, l) = x.strip_prefix('[')?.strip_suffix(']')?.split_once(':')?;
                Some((m.parse().ok()?, l.parse().ok()?))
            };
            matches!((parse(o), parse(r)), (Some((m0, l0)), Some((m1, l1))) if l0 == l1 && (m0 - m1).abs() == 1 && m1 >= l1)
        }
    }
}

fn fresh_copy(root: &Path, name: &str, design: &FixtureDesign) -> PathBuf {
    let dir = root.join(name);
    std::fs::create_dir_all(&dir).unwrap();
    for (f, t) in &design.sources {
        std::fs::write(dir.join(f), t).unwrap();
    }
    dir
}

#[test]
fn criterion_7_mutation_loop() {
    let _g = serial();
    let tmp = tempfile::tempdir().unwrap();
    let design = gen_design(9, 31).unwrap();
    let table = scan_sources(&DesignSources { files: design.sources.clone() }).unwrap();
    let targets = design.targets();
    let watch = Watch { inner: FixtureChecker::new(&design.sources), design: &design, checks: AtomicUsize::new(0), dirty: AtomicUsize::new(0) };
    let (cache, log) = (MutationCache::in_memory(), FailureLog::in_memory());
    let mut accepted: BTreeMap<BugType, usize> = BugType::ALL.iter().map(|b| (*b, 0)).collect();
    let (mut rejected_scenarios, mut unreverted, mut nonconforming, mut wrong_diff, mut replay_mismatch) = (0, 0, 0, 0, 0);
    let mut rejected_attempts = 0u32;
    let mut mutated: Vec<(InjectRequest, BTreeMap<PathBuf, Vec<u8>>)> = Vec::new();

    for i in 0..SCENARIOS {
        let bug = BugType::ALL[i % BugType::ALL.len()];
        let module = targets[(i / BugType::ALL.len()) % targets.len()].clone();
        let req = InjectRequest {
            scenario_id: format!("acc-{i:03}"),
            module,
            bug_types: vec![bug],
            seed: seed::substream(7, "acceptance.mutate", i as u64),
            max_attempts: 4,
        };
        let dir = fresh_copy(tmp.path(), &req.scenario_id, &design);
        let s = inject_scenario(&req, &dir, &table, &RulePlanner, &watch, &cache, &log).unwrap();
        let after = snapshot(&dir, &design);
        if s.status == ScenarioStatus::Accepted {
            *accepted.get_mut(&bug).unwrap() += 1;
            rejected_attempts += s.attempts - 1;
            for p in &s.patches {
                if !(conforms(&p.spec) && rule_holds(&p.spec)) {
                    nonconforming += 1;
                }
                let text = &design.sources.iter().find(|(f, _)| *f == p.spec.file).unwrap().1;
                let expect = format!("{}{}{}", &text[..p.spec.site.start], p.spec.replacement, &text[p.spec.site.end..]);
                if after[&p.spec.file] != expect.as_bytes() {
                    wrong_diff += 1;
                }
            }
            revert_all(&s.patches, &dir).unwrap();
            if snapshot(&dir, &design) != pristine(&design) {
                unreverted += 1;
            }
            mutated.push((req, after));
        } else {
            rejected_scenarios += 1;
            rejected_attempts += s.attempts;
            if after != pristine(&design) {
                unreverted += 1;
            }
        }
    }

    for (req, expected) in &mutated {
        let dir = fresh_copy(tmp.path(), &format!("{}-replay", req.scenario_id), &design);
        let s = inject_scenario(req, &dir, &table, &RulePlanner, &watch, &cache, &log).unwrap();
        if !s.from_cache || s.status != ScenarioStatus::Accepted || snapshot(&dir, &design) != *expected {
            replay_mismatch += 1;
        }
    }

    let dirty = watch.dirty.load(Ordering::Relaxed);
    let every_type = accepted.values().all(|&n| n > 0);
    let pass = unreverted == 0 && dirty == 0 && nonconforming == 0 && wrong_diff == 0 && replay_mismatch == 0 && every_type;
    let per_type: Vec<String> = accepted.iter().map(|(b, n)| format!("{}={n}", b.as_str())).collect();
    let detail = format!(
        "{SCENARIOS} scenarios, accepted [{}], {rejected_scenarios} rejected, {rejected_attempts} rejected attempts; {} checks with {dirty} unreverted predecessors, {unreverted} trees not restored, {nonconforming} nonconforming, {wrong_diff} unexpected diffs, {} replays with {replay_mismatch} mismatches",
        per_type.join(" "),
        watch.checks.load(Ordering::Relaxed),
        mutated.len()
    );
    verdict(7, "mutation loop", pass, &detail);
    assert!(pass, "{detail}");
}
