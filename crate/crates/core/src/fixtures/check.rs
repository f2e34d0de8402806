// SPDX-License-Identifier: Apache-2.0

//! Stand-ins for the compile and test steps on fixture designs, and the
//! classifier-independent separability certificate.

use super::design::DEAD_MACRO;
use crate::extract::Dataset;
use crate::mutate::{CheckOutcome, Checker, MutateError};
use crate::rtl::lex::lex;
use crate::rtl::scan_text;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Checks patched copies of a fixture design against its pristine sources.
/// Compilation is the scanner plus a few structural rules; the regression
/// fails whenever a change lands outside dead code.
#[derive(Debug, Clone)]
pub struct FixtureChecker {
    pristine: BTreeMap<PathBuf, String>,
}

impl FixtureChecker {
    pub fn new(sources: &[(PathBuf, String)]) -> Self {
        FixtureChecker { pristine: sources.iter().cloned().collect() }
    }

    fn read(&self, dir: &Path, file: &Path) -> Result<String, MutateError> {
        let p = dir.join(file);
        std::fs::read_to_string(&p).map_err(|source| MutateError::Io { path: p, source })
    }
}

/// Rejects what a compiler would: scanner errors, unbalanced
/// `begin`/`end`, and an `if` or `else` left without a statement.
pub fn compiles(file: &str, text: &str) -> bool {
    let Ok(toks) = lex(text) else { return false };
    if scan_text(file, text).is_err() {
        return false;
    }
    let mut depth = 0i64;
    for (i, t) in toks.iter().enumerate() {
        match t.text {
            "begin" => depth += 1,
            "end" if i > 0 && toks[i - 1].is("else") => return false,
            "end" => depth -= 1,
            "else" if i > 0 && toks[i - 1].is(")") => return false,
            _ => {}
        }
        if depth < 0 {
            return false;
        }
    }
    depth == 0
}

/// Byte spans of `` `ifdef FX_UNUSED_DEBUG `` blocks, directive lines included.
pub fn dead_regions(text: &str) -> Vec<(usize, usize)> {
    let open = format!("`ifdef {DEAD_MACRO}");
    let mut out = Vec::new();
    let mut from = 0;
    while let Some(s) = text[from..].find(&open).map(|p| p + from) {
        let Some(e) = text[s..].find("`endif").map(|p| p + s + "`endif".len()) else { break };
        out.push((s, e));
        from = e;
    }
    out
}

/// The pristine byte range that differs from `patched`.
fn changed_range(pristine: &str, patched: &str) -> Option<(usize, usize)> {
    if pristine == patched {
        return None;
    }
    let (a, b) = (pristine.as_bytes(), patched.as_bytes());
    let prefix = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    let max_suffix = a.len().min(b.len()) - prefix;
    let suffix = a.iter().rev().zip(b.iter().rev()).take(max_suffix).take_while(|(x, y)| x == y).count();
    Some((prefix, a.len() - suffix))
}

impl Checker for FixtureChecker {
    fn compile(&self, design_dir: &Path, _: &str) -> Result<CheckOutcome, MutateError> {
        for file in self.pristine.keys() {
            let text = self.read(design_dir, file)?;
            if !compiles(&file.display().to_string(), &text) {
                return Ok(CheckOutcome::Fail);
            }
        }
        Ok(CheckOutcome::Pass)
    }

    fn test(&self, design_dir: &Path, _: &str) -> Result<CheckOutcome, MutateError> {
        for (file, pristine) in &self.pristine {
            let text = self.read(design_dir, file)?;
            if let Some((s, e)) = changed_range(pristine, &text) {
                let dead = dead_regions(pristine).iter().any(|&(ds, de)| ds <= s && e <= de);
                if !dead {
                    return Ok(CheckOutcome::Fail);
                }
            }
        }
        Ok(CheckOutcome::Pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSeparation {
    /// Features whose one-vs-rest mean gap reaches the threshold, with the
    /// gap in pooled standard deviations.
    pub features: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityCertificate {
    pub min_gap: f64,
    pub min_features: usize,
    pub per_class: BTreeMap<String, ClassSeparation>,
    pub passed: bool,
}

/// Mean and sample variance.
fn moments(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var)
}

/// For each class, count features whose class mean differs from the mean of
/// all other rows by at least `min_gap` pooled standard deviations.
pub fn separability_certificate(ds: &Dataset, min_gap: f64, min_features: usize) -> SeparabilityCertificate {
    let mut per_class = BTreeMap::new();
    for class in ds.classes() {
        let mut features = Vec::new();
        for (f, name) in ds.feature_names.iter().enumerate() {
            let (inside, outside): (Vec<f64>, Vec<f64>) = {
                let mut a = Vec::new();
                let mut b = Vec::new();
                for r in &ds.rows {
                    if r.label == class { a.push(r.features[f]) } else { b.push(r.features[f]) }
                }
                (a, b)
            };
            if inside.len() < 2 || outside.len() < 2 {
                continue;
            }
            let (m1, v1) = moments(&inside);
            let (m2, v2) = moments(&outside);
            let (n1, n2) = (inside.len() as f64, outside.len() as f64);
            let pooled = (((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / (n1 + n2 - 2.0)).sqrt();
            let gap = (m1 - m2).abs();
            let sep = if pooled > 0.0 { gap / pooled } else if gap > 0.0 { f64::INFINITY } else { 0.0 };
            if sep >= min_gap {
                features.push((name.clone(), sep));
            }
        }
        per_class.insert(class, ClassSeparation { features });
    }
    let passed = !per_class.is_empty() && per_class.values().all(|c| c.features.len() >= min_features);
    SeparabilityCertificate { min_gap, min_features, per_class, passed }
}
