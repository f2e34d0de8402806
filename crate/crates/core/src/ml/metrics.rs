// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub support: u64,
    pub tpr: f64,
    pub fpr: f64,
    pub precision: f64,
    pub f1: f64,
    /// One-vs-rest ROC area; `None` when the test split has no negatives.
    pub auc: Option<f64>,
}

/// Classification quality on a test split. Macro averages run over the
/// classes present in the split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub classes: Vec<String>,
    pub n_samples: usize,
    pub top1: f64,
    pub top3: f64,
    pub macro_f1: f64,
    pub macro_tpr: f64,
    pub macro_fpr: f64,
    pub auc_roc_macro: Option<f64>,
    /// Rows are true classes, columns predicted classes.
    pub confusion: Vec<Vec<u64>>,
    pub per_class: Vec<ClassMetrics>,
}

/// Class indices ordered by descending score, ties to the lower index.
pub fn rank_classes(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Area under the one-vs-rest ROC curve built from every distinct score
/// threshold, integrated with the trapezoid rule.
pub fn roc_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut fp) = (0usize, 0usize);
    let (mut prev_tpr, mut prev_fpr) = (0.0, 0.0);
    let mut area = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if positive[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let tpr = tp as f64 / n_pos as f64;
        let fpr = fp as f64 / n_neg as f64;
        area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        prev_tpr = tpr;
        prev_fpr = fpr;
    }
    Some(area)
}

impl MetricsReport {
    /// `scores[i]` is the probability row of sample `i`, aligned to
    /// `classes`; `truth[i]` indexes `classes`.
    pub fn from_scores(scores: &[Vec<f64>], truth: &[usize], classes: Vec<String>) -> MetricsReport {
        let m = classes.len();
        let n = truth.len();
        let k3 = m.min(3);
        let mut confusion = vec![vec![0u64; m]; m];
        let (mut hit1, mut hit3) = (0usize, 0usize);
        for (s, &t) in scores.iter().zip(truth) {
            let ranked = rank_classes(s);
            confusion[t][ranked[0]] += 1;
            hit1 += (ranked[0] == t) as usize;
            hit3 += ranked[..k3].contains(&t) as usize;
        }
        let mut per_class = Vec::with_capacity(m);
        for c in 0..m {
            let support: u64 = confusion[c].iter().sum();
            let tp = confusion[c][c] as f64;
            let fn_ = support as f64 - tp;
            let predicted: u64 = confusion.iter().map(|r| r[c]).sum();
            let fp = predicted as f64 - tp;
            let tn = n as f64 - tp - fn_ - fp;
            let col: Vec<f64> = scores.iter().map(|s| s[c]).collect();
            let pos: Vec<bool> = truth.iter().map(|&t| t == c).collect();
            per_class.push(ClassMetrics {
                label: classes[c].clone(),
                support,
                tpr: ratio(tp, tp + fn_),
                fpr: ratio(fp, fp + tn),
                precision: ratio(tp, tp + fp),
                f1: ratio(2.0 * tp, 2.0 * tp + fp + fn_),
                auc: if support > 0 { roc_auc(&col, &pos) } else { None },
            });
        }
        let present: Vec<&ClassMetrics> = per_class.iter().filter(|c| c.support > 0).collect();
        let mean = |f: &dyn Fn(&ClassMetrics) -> f64| ratio(present.iter().map(|c| f(c)).sum(), present.len() as f64);
        let aucs: Vec<f64> = present.iter().filter_map(|c| c.auc).collect();
        MetricsReport {
            n_samples: n,
            top1: ratio(hit1 as f64, n as f64),
            top3: ratio(hit3 as f64, n as f64),
            macro_f1: mean(&|c| c.f1),
            macro_tpr: mean(&|c| c.tpr),
            macro_fpr: mean(&|c| c.fpr),
            auc_roc_macro: (!aucs.is_empty()).then(|| aucs.iter().sum::<f64>() / aucs.len() as f64),
            confusion,
            per_class,
            classes,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Confusion matrix with a `true\predicted` corner cell.
    pub fn confusion_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["true\\predicted".to_string()];
        header.extend(self.classes.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for (label, row) in self.classes.iter().zip(&self.confusion) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(u64::to_string));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    /// Row-normalized confusion heatmap.
    pub fn confusion_svg(&self) -> String {
        let m = self.classes.len();
        let cell = 40usize;
        let margin = 10 + self.classes.iter().map(|c| c.len()).max().unwrap_or(1) * 7;
        let size = margin + m * cell + 10;
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" font-family="monospace" font-size="11">"#);
        for (i, row) in self.confusion.iter().enumerate() {
            let total: u64 = row.iter().sum();
            for (j, &v) in row.iter().enumerate() {
                let frac = ratio(v as f64, total as f64);
                let shade = (255.0 * (1.0 - frac)).round() as u8;
                let (x, y) = (margin + j * cell, margin + i * cell);
                let _ = writeln!(s, r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="rgb({shade},{shade},255)" stroke="grey"/>"#);
                let color = if frac > 0.5 { "white" } else { "black" };
                let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" fill="{color}">{v}</text>"#, x + cell / 2, y + cell / 2 + 4);
            }
        }
        for (i, c) in self.classes.iter().enumerate() {
            let esc = c.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{esc}</text>"#, margin - 4, margin + i * cell + cell / 2 + 4);
            let _ = writeln!(
                s,
                r#"<text x="{x}" y="{y}" transform="rotate(-90 {x} {y})">{esc}</text>"#,
                x = margin + i * cell + cell / 2 + 4,
                y = margin - 4
            );
        }
        s.push_str("</svg>\n");
        s
    }

    /// Plain-text summary.
    pub fn render_text(&self) -> String {
        let auc = self.auc_roc_macro.map_or_else(|| "n/a".to_string(), |a| format!("{a:.4}"));
        let mut s = format!(
            "samples      {}\ntop-1        {:.4}\ntop-3        {:.4}\nmacro F1     {:.4}\nmacro TPR    {:.4}\nmacro FPR    {:.4}\nmacro AUC    {auc}\n\n",
            self.n_samples, self.top1, self.top3, self.macro_f1, self.macro_tpr, self.macro_fpr
        );
        let width = self.classes.iter().map(String::len).max().unwrap_or(5).max(5);
        let _ = writeln!(s, "{:width$}  support    tpr    fpr     f1    auc", "class");
        for c in &self.per_class {
            let auc = c.auc.map_or_else(|| "   n/a".to_string(), |a| format!("{a:6.3}"));
            let _ = writeln!(s, "{:width$}  {:7}  {:5.3}  {:5.3}  {:5.3} {auc}", c.label, c.support, c.tpr, c.fpr, c.f1);
        }
        s
    }
}
