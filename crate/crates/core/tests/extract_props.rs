// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use std::collections::BTreeMap;
use wavetriage_core::extract::{sample_window, standardize, summarize, Stat, StatSet, ValueEncoding, WaveWindow};
use wavetriage_core::select::{SelectedSignal, SelectionReport};
use wavetriage_core::vcd::{id_code_for, parse_header, write_vcd, Bit, Scope, ScopeItem, ScopeTree, SignalDecl, TimeUnit, Timescale, Value, ValueChange, VarKind};

fn window(rows: usize, cols: usize, data: Vec<f64>) -> WaveWindow {
    WaveWindow {
        data,
        tick_times: (0..rows as u64).map(Some).collect(),
        signals: (0..cols).map(|c| format!("top.s{c}")).collect(),
        label: "m".into(),
        scenario_id: "x".into(),
        total_ticks: rows,
    }
}

fn random_window() -> impl Strategy<Value = WaveWindow> {
    (1usize..6, 1usize..60).prop_flat_map(|(cols, rows)| {
        prop::collection::vec(-100.0f64..100.0, rows * cols).prop_map(move |d| window(rows, cols, d))
    })
}

/// Four-state encoding restated: 0, 1, x = -1, z = -2; vectors read as
/// unsigned integers unless they hold x or z.
fn encode(v: &Value) -> f64 {
    match v {
        Value::Scalar(Bit::Zero) => 0.0,
        Value::Scalar(Bit::One) => 1.0,
        Value::Scalar(Bit::X) => -1.0,
        Value::Scalar(Bit::Z) => -2.0,
        Value::Vector(bits) => {
            if bits.iter().any(|b| matches!(b, Bit::X | Bit::Z)) {
                -1.0
            } else {
                bits.iter().fold(0u64, |a, b| a * 2 + u64::from(*b == Bit::One)) as f64
            }
        }
        Value::Real(r) => *r,
    }
}

fn quantile_ref(values: &[f64], q: f64) -> f64 {
    let mut s = values.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q * (s.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    s[lo] * (1.0 - (pos - lo as f64)) + s[hi] * (pos - lo as f64)
}

fn stat_ref(values: &[f64], stat: Stat) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    match stat {
        Stat::Mean => mean,
        Stat::Std if values.len() == 1 => 0.0,
        Stat::Std => (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt(),
        Stat::Min => values.iter().cloned().fold(f64::MAX, f64::min),
        Stat::Max => values.iter().cloned().fold(f64::MIN, f64::max),
        Stat::Quantile(p) => quantile_ref(values, p as f64 / 100.0),
    }
}

fn small_dump() -> impl Strategy<Value = (Vec<u32>, Vec<ValueChange>)> {
    prop::collection::vec(prop::sample::select(vec![1u32, 1, 3, 8]), 1..=10).prop_flat_map(|widths| {
        let n = widths.len();
        let w2 = widths.clone();
        prop::collection::vec((0u64..3, 0..n, prop::collection::vec(0u8..4, 8)), 0..=100).prop_map(move |raw| {
            let mut t = 0;
            let changes = raw
                .into_iter()
                .map(|(dt, i, bits)| {
                    t += dt;
                    let b = |x: u8| [Bit::Zero, Bit::One, Bit::X, Bit::Z][x as usize];
                    let value = if w2[i] == 1 { Value::Scalar(b(bits[0])) } else { Value::Vector(bits[..w2[i] as usize].iter().map(|&x| b(x)).collect()) };
                    ValueChange { time: t, id_code: id_code_for(i), value }
                })
                .collect();
            (w2.clone(), changes)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn standardize_yields_exactly_t_rows(t in 1usize..40, frac in 0.0f64..=3.0, cols in 1usize..4) {
        let n = (frac * t as f64).round() as usize;
        let data: Vec<f64> = (0..n * cols).map(|i| i as f64 + 1.0).collect();
        let w = standardize(window(n, cols, data.clone()), t);
        prop_assert_eq!(w.rows(), t);
        prop_assert_eq!(w.data.len(), t * cols);
        let kept = n.min(t);
        // the last row stays the last input row; padding is zero and leads
        prop_assert_eq!(&w.data[(t - kept) * cols..], &data[(n - kept) * cols..]);
        prop_assert!(w.data[..(t - kept) * cols].iter().all(|&v| v == 0.0));
        prop_assert!(w.tick_times[..t - kept].iter().all(Option::is_none));
    }

    #[test]
    fn window_matches_per_tick_replay((widths, changes) in small_dump(), t in 1usize..30) {
        let mut top = Scope::new("module", "top");
        for (i, &w) in widths.iter().enumerate() {
            top.items.push(ScopeItem::Var(SignalDecl { id_code: id_code_for(i), name: format!("s{i}"), width: w, kind: VarKind::Wire, scope_path: vec!["top".into()] }));
        }
        let tree = ScopeTree { timescale: Timescale::new(1, TimeUnit::Ns).unwrap(), roots: vec![top] };
        let bytes = write_vcd(Vec::new(), &tree, &changes).unwrap();
        let selection = SelectionReport {
            selected: widths.iter().enumerate().map(|(i, &w)| SelectedSignal { full_name: format!("top.s{i}"), id_code: id_code_for(i), width: w, owning_target: "top".into() }).collect(),
            dropped_count: 0,
            per_target_counts: BTreeMap::new(),
        };
        let (_, body) = parse_header(&bytes[..]).unwrap();
        let got = sample_window(body, &selection, t, &ValueEncoding::default(), "top", "x");
        let mut times: Vec<u64> = changes.iter().map(|c| c.time).collect();
        times.dedup();
        if times.is_empty() {
            prop_assert!(got.is_err());
            return Ok(());
        }
        let got = got.unwrap();
        let tail = &times[times.len().saturating_sub(t)..];
        let mut expect = Vec::new();
        for &tick in tail {
            for i in 0..widths.len() {
                let id = id_code_for(i);
                let last = changes.iter().rfind(|c| c.time <= tick && c.id_code == id);
                expect.push(last.map_or(-1.0, |c| encode(&c.value)));
            }
        }
        prop_assert_eq!(got.tick_times, tail.iter().map(|&x| Some(x)).collect::<Vec<_>>());
        prop_assert_eq!(got.data, expect);
        prop_assert_eq!(got.total_ticks, times.len());
    }

    #[test]
    fn summary_matches_brute_force(w in random_window()) {
        let stats: StatSet = "mean,std,min,max,q0,q10,q25,q50,q75,q90,q100".parse().unwrap();
        let row = summarize(&w, &stats);
        prop_assert_eq!(row.features.len(), w.cols() * stats.len());
        for c in 0..w.cols() {
            let col: Vec<f64> = w.column(c).collect();
            for (k, s) in stats.0.iter().enumerate() {
                let got = row.features[c * stats.len() + k];
                let want = stat_ref(&col, *s);
                prop_assert!((got - want).abs() <= 1e-9, "{} {s}: {got} vs {want}", w.signals[c]);
                prop_assert_eq!(&row.feature_names[c * stats.len() + k], &format!("{}__{s}", w.signals[c]));
            }
        }
    }

    #[test]
    fn feature_count_ignores_window_length(w in random_window(), t1 in 1usize..80, t2 in 1usize..80) {
        let stats = StatSet::default();
        let a = summarize(&standardize(w.clone(), t1), &stats);
        let b = summarize(&standardize(w.clone(), t2), &stats);
        prop_assert_eq!(a.features.len(), w.cols() * stats.len());
        prop_assert_eq!(a.feature_names, b.feature_names);
        prop_assert!(a.features.iter().all(|v| v.is_finite()));
    }
}
