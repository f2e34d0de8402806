// SPDX-License-Identifier: Apache-2.0

use crate::commands::StagesFile;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use wavetriage_core::ml::MetricsReport;
use wavetriage_core::orchestrate::StageReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub tick_cap: usize,
    pub top1: f64,
    pub top3: f64,
    pub macro_f1: f64,
    pub final_csv_bytes: u64,
    /// Dumps (train and test) that filled the whole window.
    pub tick_capped: usize,
}

fn ratio(a: u64, b: u64) -> String {
    if b == 0 {
        "-".into()
    } else {
        format!("{:.1}x", a as f64 / b as f64)
    }
}

fn stage_lines(out: &mut String, name: &str, s: &StageReport) {
    let _ = writeln!(out, "{name}: {} waveforms, {} at the tick cap", s.waveforms, s.tick_capped.len());
    let _ = writeln!(out, "  {:<12} {:>14} {:>10}", "stage", "bytes", "vs final");
    for (stage, bytes) in [("raw", s.raw), ("rough", s.rough), ("compressed", s.compressed), ("final", s.final_csv)] {
        let _ = writeln!(out, "  {stage:<12} {bytes:>14} {:>10}", ratio(bytes, s.final_csv));
    }
}

/// Text report: one block per model, then stage sizes and the ablation.
pub fn render(metrics: &[(String, MetricsReport)], stages: Option<&StagesFile>, ablation: Option<&[AblationRow]>) -> String {
    let mut out = String::new();
    for (name, r) in metrics {
        let _ = writeln!(out, "== {name} ==");
        out.push_str(&r.render_text());
        out.push('\n');
    }
    if let Some(s) = stages {
        let _ = writeln!(out, "== data size per stage ==");
        stage_lines(&mut out, "train", &s.train);
        if s.test.waveforms > 0 {
            stage_lines(&mut out, "test", &s.test);
        }
        out.push('\n');
    }
    if let Some(rows) = ablation {
        let _ = writeln!(out, "== tick-cap ablation (gbt) ==");
        let _ = writeln!(out, "  {:>8} {:>7} {:>7} {:>9} {:>12} {:>7}", "T", "top1", "top3", "macro_f1", "final bytes", "capped");
        for r in rows {
            let _ = writeln!(
                out,
                "  {:>8} {:>7.3} {:>7.3} {:>9.3} {:>12} {:>7}",
                r.tick_cap, r.top1, r.top3, r.macro_f1, r.final_csv_bytes, r.tick_capped
            );
        }
    }
    out
}
