// SPDX-License-Identifier: Apache-2.0

//! Criterion 9: iterative signal reduction with the pinning rule.

use crate::{serial, verdict};
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};
use wavetriage_core::extract::{Dataset, Sample};
use wavetriage_core::feature_select::{reduce, ReduceConfig};
use wavetriage_core::seed;

const SIGNALS: usize = 5000;
const ROWS: usize = 90;
const CLASSES: usize = 3;
const BIG_MODULES: usize = 4;
const KEEP: f64 = 0.6;
const LIMIT: usize = 5000;
const TIGHT_LIMIT: usize = 1000;
const INFORMATIVE: &str = "tb.dut.u_big0.key";
const SOLO: &str = "tb.dut.u_solo.only";

/// One informative signal, one signal in a single-signal module, and noise.
fn dataset() -> (Dataset, BTreeMap<String, String>) {
    let mut rng = seed::rng(9, "acceptance.reduce", 0);
    let mut signals = vec![(INFORMATIVE.to_string(), "big0".to_string()), (SOLO.to_string(), "solo".to_string())];
    for i in 0..SIGNALS - 2 {
        let m = i % BIG_MODULES;
        signals.push((format!("tb.dut.u_big{m}.n{i:04}"), format!("big{m}")));
    }
    let names = signals.iter().map(|(s, _)| format!("{s}__mean")).collect();
    let rows = (0..ROWS)
        .map(|r| {
            let class = r % CLASSES;
            let features = signals
                .iter()
                .map(|(s, _)| if s == INFORMATIVE { class as f64 * 10.0 + rng.gen::<f64>() } else { rng.gen::<f64>() })
                .collect();
            Sample { scenario_id: format!("r{r:03}"), label: format!("class{class}"), features }
        })
        .collect();
    (Dataset::new(names, rows), signals.into_iter().collect())
}

#[test]
fn criterion_9_feature_reduction() {
    let _g = serial();
    let (ds, coverage) = dataset();
    let targets: BTreeSet<String> = coverage.values().cloned().collect();

    let at_limit = reduce(&ds, &ReduceConfig { keep_fraction: KEEP, max_signals: LIMIT, ..Default::default() }, &coverage, &targets).unwrap();
    let untouched = at_limit.history.is_empty() && at_limit.dataset == ds;

    let tight = reduce(&ds, &ReduceConfig { keep_fraction: KEEP, max_signals: TIGHT_LIMIT, ..Default::default() }, &coverage, &targets).unwrap();
    let final_signals = tight.dataset.signals();
    let mut prev = SIGNALS;
    let mut sizes_ok = true;
    let mut sizes = vec![SIGNALS.to_string()];
    for h in &tight.history {
        let expect = (KEEP * prev as f64).ceil() as usize + h.pinned.len();
        sizes_ok &= h.retained.len() == expect && h.retained.len() < prev;
        prev = h.retained.len();
        sizes.push(prev.to_string());
    }
    let within = final_signals.len() <= TIGHT_LIMIT;
    let solo_kept = final_signals.iter().any(|s| s == SOLO);
    let solo_pinned = tight.history.iter().any(|h| h.pinned.iter().any(|s| s == SOLO));
    let informative_first = !tight.history.is_empty() && tight.history.iter().all(|h| h.retained.first().is_some_and(|s| s == INFORMATIVE));
    let every_module = targets.iter().all(|m| final_signals.iter().any(|s| coverage[s] == *m));

    let pass = untouched && sizes_ok && within && solo_kept && solo_pinned && informative_first && every_module;
    let detail = format!(
        "{SIGNALS} signals at limit {LIMIT}: {}; limit {TIGHT_LIMIT} with p={KEEP}: sizes {} in {} iterations; single-signal module {}{}; informative signal {}",
        if untouched { "unchanged" } else { "CHANGED" },
        sizes.join(" -> "),
        tight.history.len(),
        if solo_kept { "retained" } else { "DROPPED" },
        if solo_pinned { " (pinned)" } else { "" },
        if informative_first { "ranked first every iteration" } else { "NOT ranked first" }
    );
    verdict(9, "feature reduction", pass, &detail);
    assert!(pass, "{detail}");
}
