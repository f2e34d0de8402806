// SPDX-License-Identifier: Apache-2.0

use super::{ExtractError, ValueEncoding};
use crate::select::{prune, PruneConfig, SelectionReport};
use crate::vcd::{list_full_names, parse_header, Body, BodyEvent, VcdError};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

/// The sampled tail of one waveform, row-major. `tick_times[r]` is `None`
/// for padding rows.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveWindow {
    pub data: Vec<f64>,
    pub tick_times: Vec<Option<u64>>,
    pub signals: Vec<String>,
    pub label: String,
    pub scenario_id: String,
    /// Distinct timestamps seen in the whole dump.
    pub total_ticks: usize,
}

impl WaveWindow {
    pub fn rows(&self) -> usize {
        self.tick_times.len()
    }

    pub fn cols(&self) -> usize {
        self.signals.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let d = self.cols();
        &self.data[r * d..(r + 1) * d]
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        let d = self.cols();
        (0..self.rows()).map(move |r| self.data[r * d + c])
    }

    /// Whether the dump reached the window length.
    pub fn tick_capped(&self, t: usize) -> bool {
        self.total_ticks >= t
    }

    /// Per-tick CSV: `tick,<full names>`. Padding rows leave `tick` empty.
    pub fn write_rough_csv<W: Write>(&self, out: W) -> Result<W, ExtractError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = Vec::with_capacity(self.cols() + 1);
        header.push("tick".to_string());
        header.extend(self.signals.iter().cloned());
        w.write_record(&header)?;
        let mut rec = Vec::with_capacity(self.cols() + 1);
        for r in 0..self.rows() {
            rec.clear();
            rec.push(self.tick_times[r].map_or_else(String::new, |t| t.to_string()));
            rec.extend(self.row(r).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.into_inner().map_err(|e| ExtractError::Io(e.into_error()))
    }
}

/// Keep the last `min(t, available)` distinct timestamps, each row holding
/// every selected signal's last-known value. Time regressions are skipped.
pub fn sample_window<R: BufRead>(
    body: Body<R>,
    selection: &SelectionReport,
    t: usize,
    encoding: &ValueEncoding,
    label: &str,
    scenario_id: &str,
) -> Result<WaveWindow, ExtractError> {
    if selection.selected.is_empty() {
        return Err(ExtractError::EmptySelection);
    }
    let t = t.max(1);
    let d = selection.selected.len();
    let mut columns: HashMap<&str, Vec<usize>> = HashMap::new();
    for (c, s) in selection.selected.iter().enumerate() {
        columns.entry(s.id_code.as_str()).or_default().push(c);
    }
    let mut current = vec![encoding.uninitialized(); d];
    let mut ring: VecDeque<(u64, Vec<f64>)> = VecDeque::with_capacity(t);
    let mut pending: Option<u64> = None;
    let mut total_ticks = 0usize;

    let flush = |time: u64, current: &[f64], ring: &mut VecDeque<(u64, Vec<f64>)>| {
        let mut row = if ring.len() == t { ring.pop_front().expect("full ring").1 } else { Vec::with_capacity(d) };
        row.clear();
        row.extend_from_slice(current);
        ring.push_back((time, row));
    };

    for event in body.events(selection.id_filter()) {
        match event {
            Ok(BodyEvent::Timestamp(time)) => {
                if pending != Some(time) {
                    if let Some(p) = pending {
                        flush(p, &current, &mut ring);
                    }
                    total_ticks += 1;
                    pending = Some(time);
                }
            }
            Ok(BodyEvent::Change(c)) => {
                if let Some(cols) = columns.get(c.id_code.as_str()) {
                    let v = encoding.encode(&c.value);
                    for &col in cols {
                        current[col] = v;
                    }
                }
            }
            Err(VcdError::TimeRegression { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let Some(last) = pending else {
        return Err(ExtractError::EmptyDump);
    };
    flush(last, &current, &mut ring);

    let mut data = Vec::with_capacity(ring.len() * d);
    let mut tick_times = Vec::with_capacity(ring.len());
    for (time, row) in ring {
        tick_times.push(Some(time));
        data.extend_from_slice(&row);
    }
    Ok(WaveWindow {
        data,
        tick_times,
        signals: selection.names(),
        label: label.to_string(),
        scenario_id: scenario_id.to_string(),
        total_ticks,
    })
}

/// Open a dump, select its signals and sample the window.
#[allow(clippy::too_many_arguments)]
pub fn sample_file(
    path: &Path,
    target_signals: &BTreeMap<String, BTreeSet<String>>,
    instances: &BTreeMap<String, Vec<crate::rtl::Instance>>,
    prune_cfg: &PruneConfig,
    t: usize,
    encoding: &ValueEncoding,
    label: &str,
    scenario_id: &str,
) -> Result<(SelectionReport, WaveWindow), ExtractError> {
    let file = std::fs::File::open(path)?;
    let (tree, body) = parse_header(BufReader::with_capacity(1 << 16, file))?;
    let selection = prune(&list_full_names(&tree), target_signals, instances, prune_cfg)
        .map_err(|e| ExtractError::Malformed(format!("{}: {e}", path.display())))?;
    let w = sample_window(body, &selection, t, encoding, label, scenario_id)?;
    Ok((selection, w))
}

/// Exactly `t` rows: longer windows keep their last `t` rows, shorter ones
/// get zero rows prepended so the final row stays the failure tick.
pub fn standardize(mut w: WaveWindow, t: usize) -> WaveWindow {
    let d = w.cols();
    let n = w.rows();
    if n > t {
        w.data.drain(..(n - t) * d);
        w.tick_times.drain(..n - t);
    } else if n < t {
        let pad = t - n;
        w.data.splice(0..0, std::iter::repeat_n(0.0, pad * d));
        w.tick_times.splice(0..0, std::iter::repeat_n(None, pad));
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::select::SelectedSignal;

    fn selection(ids: &[&str]) -> SelectionReport {
        SelectionReport {
            selected: ids
                .iter()
                .map(|id| SelectedSignal { full_name: format!("top.s{id}"), id_code: id.to_string(), width: 1, owning_target: "top".into() })
                .collect(),
            dropped_count: 0,
            per_target_counts: BTreeMap::new(),
        }
    }

    fn window(body: &str, ids: &[&str], t: usize) -> Result<WaveWindow, ExtractError> {
        let header = "$scope module top $end $var wire 1 ! a $end $var wire 1 \" b $end $upscope $end $enddefinitions $end ";
        let src = format!("{header}{body}");
        let (_, body) = parse_header(src.as_bytes()).unwrap();
        sample_window(body, &selection(ids), t, &ValueEncoding::default(), "top", "s0")
    }

    #[test]
    fn forward_fill_across_ticks() {
        let w = window("#0 0! #5 1! #9 0\"", &["!"], 2).unwrap();
        assert_eq!(w.tick_times, vec![Some(5), Some(9)]);
        assert_eq!(w.data, vec![1.0, 1.0]);
        assert_eq!(w.total_ticks, 3);
    }

    #[test]
    fn short_dump_and_uninitialized() {
        let w = window("#0 0! #5 1!", &["!", "\""], 10).unwrap();
        assert_eq!(w.rows(), 2);
        assert_eq!(w.column(1).collect::<Vec<_>>(), vec![-1.0, -1.0]);
        assert!(!w.tick_capped(10));
    }

    #[test]
    fn no_timestamps() {
        assert!(matches!(window("", &["!"], 4), Err(ExtractError::EmptyDump)));
    }

    #[test]
    fn standardize_trims_and_pads() {
        let w = window("#0 1! #1 0! #2 1! #3 0!", &["!"], 10).unwrap();
        let trimmed = standardize(w.clone(), 2);
        assert_eq!(trimmed.data, vec![1.0, 0.0]);
        assert_eq!(trimmed.tick_times, vec![Some(2), Some(3)]);
        let padded = standardize(w.clone(), 6);
        assert_eq!(padded.data, vec![0.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(padded.tick_times[..2], [None, None]);
        assert_eq!(standardize(w.clone(), 4), w);
    }

    #[test]
    fn rough_csv_layout() {
        let w = standardize(window("#0 1! #4 0!", &["!"], 4).unwrap(), 3);
        let out = String::from_utf8(w.write_rough_csv(Vec::new()).unwrap()).unwrap();
        assert_eq!(out, "tick,top.s!\n,0\n0,1\n4,0\n");
    }
}
