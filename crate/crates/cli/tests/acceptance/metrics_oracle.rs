// SPDX-License-Identifier: Apache-2.0

//! Criterion 5: metrics against a brute-force reference.

use crate::{serial, verdict};
use rand::Rng;
use wavetriage_core::ml::MetricsReport;
use wavetriage_core::seed;

const TABLES: usize = 1000;
const TOL: f64 = 1e-9;
const AUC_TOL: f64 = 1e-6;

/// Rank of the true class: classes scoring higher, plus equal scores at a
/// lower index.
fn rank_of(scores: &[f64], t: usize) -> usize {
    (0..scores.len()).filter(|&c| scores[c] > scores[t] || (scores[c] == scores[t] && c < t)).count()
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for c in 1..scores.len() {
        if scores[c] > scores[best] {
            best = c;
        }
    }
    best
}

fn div(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half.
fn mann_whitney(scores: &[f64], pos: &[bool]) -> Option<f64> {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if pos[i] && !pos[j] {
                pairs += 1.0;
                wins += if scores[i] > scores[j] {
                    1.0
                } else if scores[i] == scores[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    (pairs > 0.0).then(|| wins / pairs)
}

struct Reference {
    top1: f64,
    top3: f64,
    f1: f64,
    tpr: f64,
    fpr: f64,
    auc: Option<f64>,
}

fn reference(scores: &[Vec<f64>], truth: &[usize], m: usize) -> Reference {
    let n = truth.len() as f64;
    let k3 = m.min(3);
    let top1 = truth.iter().zip(scores).filter(|(&t, s)| rank_of(s, t) == 0).count() as f64 / n;
    let top3 = truth.iter().zip(scores).filter(|(&t, s)| rank_of(s, t) < k3).count() as f64 / n;
    let pred: Vec<usize> = scores.iter().map(|s| argmax(s)).collect();
    let (mut f1s, mut tprs, mut fprs, mut aucs) = (vec![], vec![], vec![], vec![]);
    for c in 0..m {
        let mut tp = 0.0;
        let mut fp = 0.0;
        let mut fn_ = 0.0;
        let mut tn = 0.0;
        for i in 0..truth.len() {
            match (truth[i] == c, pred[i] == c) {
                (true, true) => tp += 1.0,
                (false, true) => fp += 1.0,
                (true, false) => fn_ += 1.0,
                (false, false) => tn += 1.0,
            }
        }
        if tp + fn_ == 0.0 {
            continue;
        }
        let precision = div(tp, tp + fp);
        let recall = div(tp, tp + fn_);
        f1s.push(div(2.0 * precision * recall, precision + recall));
        tprs.push(recall);
        fprs.push(div(fp, fp + tn));
        let col: Vec<f64> = scores.iter().map(|s| s[c]).collect();
        let pos: Vec<bool> = truth.iter().map(|&t| t == c).collect();
        if let Some(a) = mann_whitney(&col, &pos) {
            aucs.push(a);
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Reference { top1, top3, f1: mean(&f1s), tpr: mean(&tprs), fpr: mean(&fprs), auc: (!aucs.is_empty()).then(|| mean(&aucs)) }
}

fn random_table(i: usize) -> (Vec<Vec<f64>>, Vec<usize>, usize) {
    let mut rng = seed::rng(5, "acceptance.metrics", i as u64);
    let m = rng.gen_range(2..=12);
    let n = rng.gen_range(1..=120);
    let coarse = rng.gen_bool(0.3);
    // some classes may be absent from the truth column
    let present = rng.gen_range(1..=m);
    let scores = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| {
                    let v: f64 = rng.gen();
                    if coarse {
                        (v * 4.0).round() / 4.0
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    let truth = (0..n).map(|_| rng.gen_range(0..present)).collect();
    (scores, truth, m)
}

#[test]
fn criterion_5_metric_oracle_equivalence() {
    let _g = serial();
    let mut worst = 0.0f64;
    let mut worst_auc = 0.0f64;
    let mut mismatched = 0;
    for i in 0..TABLES {
        let (scores, truth, m) = random_table(i);
        let classes = (0..m).map(|c| format!("c{c:02}")).collect();
        let r = MetricsReport::from_scores(&scores, &truth, classes);
        let o = reference(&scores, &truth, m);
        let d = [r.top1 - o.top1, r.top3 - o.top3, r.macro_f1 - o.f1, r.macro_tpr - o.tpr, r.macro_fpr - o.fpr]
            .iter()
            .fold(0.0f64, |a, x| a.max(x.abs()));
        let da = match (r.auc_roc_macro, o.auc) {
            (Some(a), Some(b)) => (a - b).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        worst = worst.max(d);
        worst_auc = worst_auc.max(da);
        if d > TOL || da > AUC_TOL {
            mismatched += 1;
        }
    }

    // [[8,2],[3,7]]
    let mut scores = Vec::new();
    let mut truth = Vec::new();
    for (t, p, count) in [(0, 0, 8), (0, 1, 2), (1, 0, 3), (1, 1, 7)] {
        for _ in 0..count {
            scores.push(if p == 0 { vec![0.9, 0.1] } else { vec![0.1, 0.9] });
            truth.push(t);
        }
    }
    let hand = MetricsReport::from_scores(&scores, &truth, vec!["a".into(), "b".into()]);
    let hand_ok = hand.confusion == vec![vec![8, 2], vec![3, 7]] && hand.macro_tpr == 0.75 && hand.macro_fpr == 0.25;

    let pass = mismatched == 0 && hand_ok;
    let detail = format!(
        "{TABLES} tables, {mismatched} mismatched; max |diff| {worst:.2e} (tol {TOL:.0e}), max auc |diff| {worst_auc:.2e} (tol {AUC_TOL:.0e}); hand example tpr {} fpr {}",
        hand.macro_tpr, hand.macro_fpr
    );
    verdict(5, "metric oracle equivalence", pass, &detail);
    assert!(pass, "{detail}");
}
