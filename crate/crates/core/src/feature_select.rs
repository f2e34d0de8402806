// SPDX-License-Identifier: Apache-2.0

//! Importance-based signal reduction for designs with many signals.

use crate::extract::{signal_of, Dataset};
use crate::ml::{fit, GbtParams, MlError, ModelKind, ModelParams};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureSelectError {
    #[error("training data has fewer than two classes")]
    SingleClass,
    #[error("module `{0}` has no signals in the dataset")]
    CoverageGap(String),
    #[error("signal `{0}` has no owning module")]
    MissingCoverage(String),
    #[error("keep fraction {0} is outside [0.5, 0.7]")]
    BadKeepFraction(f64),
    #[error(transparent)]
    Ml(MlError),
}

impl From<MlError> for FeatureSelectError {
    fn from(e: MlError) -> Self {
        match e {
            MlError::SingleClass => FeatureSelectError::SingleClass,
            other => FeatureSelectError::Ml(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalRanking {
    pub iteration: usize,
    /// Summed total gain of each signal's feature columns.
    pub per_signal_importance: BTreeMap<String, f64>,
    /// Importance descending, ties by name.
    pub retained: Vec<String>,
    /// Signals kept only because they were their module's last one.
    pub pinned: Vec<String>,
    /// Retained signals per module after this iteration.
    pub per_module_retained: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReduceConfig {
    pub keep_fraction: f64,
    pub max_signals: usize,
    pub gbt: GbtParams,
    pub seed: u64,
}

impl Default for ReduceConfig {
    fn default() -> Self {
        ReduceConfig { keep_fraction: 0.6, max_signals: 5000, gbt: GbtParams::default(), seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct ReduceOutcome {
    pub dataset: Dataset,
    /// One entry per iteration; empty when no reduction was needed.
    pub history: Vec<SignalRanking>,
}

fn sort_by_importance(imp: &BTreeMap<String, f64>) -> Vec<String> {
    let mut names: Vec<&String> = imp.keys().collect();
    names.sort_by(|a, b| imp[*b].total_cmp(&imp[*a]).then(a.cmp(b)));
    names.into_iter().cloned().collect()
}

/// Fit a boosted model on `train` and aggregate per-feature gain to signals.
pub fn rank_signals(train: &Dataset, gbt: &GbtParams, seed: u64) -> Result<SignalRanking, FeatureSelectError> {
    let params = ModelParams { gbt: gbt.clone(), ..Default::default() };
    let model = fit(ModelKind::Gbt, train, &params, seed)?;
    let gains = model.feature_importance().expect("boosted models report importance");
    let mut per_signal: BTreeMap<String, f64> = train.signals().into_iter().map(|s| (s, 0.0)).collect();
    for (name, g) in train.feature_names.iter().zip(gains) {
        *per_signal.get_mut(signal_of(name)).expect("signal listed") += g;
    }
    Ok(SignalRanking {
        iteration: 0,
        retained: sort_by_importance(&per_signal),
        per_signal_importance: per_signal,
        pinned: Vec::new(),
        per_module_retained: BTreeMap::new(),
    })
}

/// Repeatedly keep the top `ceil(p * n)` signals until at most
/// `max_signals` remain. A module about to lose its last signal keeps its
/// best-ranked one instead. Stops early if an iteration cannot shrink the set.
pub fn reduce(
    train: &Dataset,
    cfg: &ReduceConfig,
    coverage: &BTreeMap<String, String>,
    targets: &BTreeSet<String>,
) -> Result<ReduceOutcome, FeatureSelectError> {
    if !(0.5..=0.7).contains(&cfg.keep_fraction) {
        return Err(FeatureSelectError::BadKeepFraction(cfg.keep_fraction));
    }
    if train.classes().len() < 2 {
        return Err(FeatureSelectError::SingleClass);
    }
    let signals = train.signals();
    for s in &signals {
        if !coverage.contains_key(s) {
            return Err(FeatureSelectError::MissingCoverage(s.clone()));
        }
    }
    let owned: HashSet<&str> = signals.iter().map(|s| coverage[s].as_str()).collect();
    for t in targets {
        if !owned.contains(t.as_str()) {
            return Err(FeatureSelectError::CoverageGap(t.clone()));
        }
    }

    let mut current = train.clone();
    let mut history = Vec::new();
    let mut count = signals.len();
    while count > cfg.max_signals {
        let mut ranking = rank_signals(&current, &cfg.gbt, cfg.seed.wrapping_add(history.len() as u64))?;
        ranking.iteration = history.len() + 1;
        let keep_n = (cfg.keep_fraction * count as f64).ceil() as usize;
        let mut keep: Vec<String> = ranking.retained[..keep_n].to_vec();
        let covered: HashSet<&str> = keep.iter().map(|s| coverage[s].as_str()).collect();
        let mut best_of: HashMap<&str, &String> = HashMap::new();
        for s in &ranking.retained {
            best_of.entry(coverage[s].as_str()).or_insert(s);
        }
        let mut pinned: Vec<String> =
            best_of.iter().filter(|(m, _)| !covered.contains(**m)).map(|(_, s)| (*s).clone()).collect();
        pinned.sort();
        keep.extend(pinned.iter().cloned());
        let order: HashMap<&String, usize> = ranking.retained.iter().enumerate().map(|(i, s)| (s, i)).collect();
        keep.sort_by_key(|s| order[s]);
        if keep.len() >= count {
            break;
        }
        let keep_set: HashSet<String> = keep.iter().cloned().collect();
        current = current.restrict_signals(&keep_set);
        count = keep.len();
        for s in &keep {
            *ranking.per_module_retained.entry(coverage[s].clone()).or_insert(0) += 1;
        }
        ranking.retained = keep;
        ranking.pinned = pinned;
        history.push(ranking);
    }
    Ok(ReduceOutcome { dataset: current, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::Sample;

    /// `n_signals` signals; signal `s0` separates the classes, the rest are
    /// constant or weak noise.
    fn dataset(n_signals: usize, rows: usize) -> Dataset {
        let mut rng = crate::seed::rng(3, "test.fs", 0);
        use rand::Rng;
        let names: Vec<String> = (0..n_signals).flat_map(|s| [format!("top.s{s}__mean"), format!("top.s{s}__std")]).collect();
        let rows = (0..rows)
            .map(|i| {
                let label = ["a", "b"][i % 2];
                let mut features = Vec::new();
                for s in 0..n_signals {
                    let v = if s == 0 { (i % 2) as f64 * 10.0 + rng.gen::<f64>() } else { rng.gen::<f64>() * 0.01 };
                    features.push(v);
                    features.push(0.0);
                }
                Sample { scenario_id: format!("r{i}"), label: label.into(), features }
            })
            .collect();
        Dataset::new(names, rows)
    }

    fn coverage(n: usize, modules: usize) -> BTreeMap<String, String> {
        (0..n).map(|s| (format!("top.s{s}"), format!("m{}", s % modules))).collect()
    }

    #[test]
    fn informative_signal_ranks_first() {
        let r = rank_signals(&dataset(6, 40), &GbtParams { n_rounds: 10, ..Default::default() }, 1).unwrap();
        assert_eq!(r.retained[0], "top.s0");
        assert!(r.per_signal_importance["top.s0"] > 0.0);
        assert_eq!(r.per_signal_importance.len(), 6);
    }

    #[test]
    fn identity_when_under_limit() {
        let ds = dataset(10, 20);
        let targets: BTreeSet<String> = (0..5).map(|m| format!("m{m}")).collect();
        let out = reduce(&ds, &ReduceConfig::default(), &coverage(10, 5), &targets).unwrap();
        assert!(out.history.is_empty());
        assert_eq!(out.dataset, ds);
    }

    #[test]
    fn shrinks_and_pins() {
        let n = 40;
        let ds = dataset(n, 30);
        let mut cov = coverage(n, 4);
        // a module owning exactly one noise signal
        cov.insert("top.s39".into(), "lonely".into());
        let targets: BTreeSet<String> = cov.values().cloned().collect();
        let cfg = ReduceConfig { keep_fraction: 0.5, max_signals: 8, gbt: GbtParams { n_rounds: 5, ..Default::default() }, seed: 0 };
        let out = reduce(&ds, &cfg, &cov, &targets).unwrap();
        let kept = out.dataset.signals();
        assert!(kept.len() <= 8);
        assert!(kept.contains(&"top.s39".to_string()));
        let mut prev = n;
        for h in &out.history {
            assert!(h.retained.len() < prev);
            prev = h.retained.len();
            assert_eq!(h.per_module_retained.len(), targets.len());
        }
    }

    #[test]
    fn errors() {
        let ds = dataset(4, 10);
        let targets: BTreeSet<String> = ["m0".to_string(), "ghost".to_string()].into();
        assert!(matches!(reduce(&ds, &ReduceConfig::default(), &coverage(4, 1), &targets), Err(FeatureSelectError::CoverageGap(m)) if m == "ghost"));
        let bad = ReduceConfig { keep_fraction: 0.9, ..Default::default() };
        assert!(matches!(reduce(&ds, &bad, &coverage(4, 1), &BTreeSet::new()), Err(FeatureSelectError::BadKeepFraction(_))));
        let single = Dataset::new(ds.feature_names.clone(), ds.rows.iter().filter(|r| r.label == "a").cloned().collect());
        assert!(matches!(rank_signals(&single, &GbtParams::default(), 0), Err(FeatureSelectError::SingleClass)));
    }
}
