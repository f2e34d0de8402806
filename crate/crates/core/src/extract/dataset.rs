// SPDX-License-Identifier: Apache-2.0

use super::{ExtractError, FeatureRow};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};

/// One labeled row of a [`Dataset`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub scenario_id: String,
    pub label: String,
    pub features: Vec<f64>,
}

/// Stacked feature rows sharing one header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub rows: Vec<Sample>,
    pub class_counts: BTreeMap<String, usize>,
}

/// Merge rows in input order. Every row must carry the same header.
pub fn assemble(rows: Vec<FeatureRow>) -> Result<Dataset, ExtractError> {
    let mut iter = rows.into_iter();
    let first = iter.next().ok_or(ExtractError::NoRows)?;
    let feature_names = first.feature_names;
    let mut samples = vec![Sample { scenario_id: first.scenario_id, label: first.label, features: first.features }];
    for (i, row) in iter.enumerate() {
        if row.feature_names != feature_names {
            return Err(ExtractError::HeaderMismatch { row: i + 1 });
        }
        samples.push(Sample { scenario_id: row.scenario_id, label: row.label, features: row.features });
    }
    Ok(Dataset::new(feature_names, samples))
}

/// Signal part of a feature name `<full_name>__<stat>`.
pub fn signal_of(feature: &str) -> &str {
    feature.rsplit_once("__").map_or(feature, |(s, _)| s)
}

fn fmt_value(v: f64) -> String {
    if v == 0.0 {
        // normalizes -0.0
        return "0.000000".to_string();
    }
    format!("{v:.6}")
}

impl Dataset {
    pub fn new(feature_names: Vec<String>, rows: Vec<Sample>) -> Self {
        let mut class_counts = BTreeMap::new();
        for r in &rows {
            *class_counts.entry(r.label.clone()).or_insert(0) += 1;
        }
        Dataset { feature_names, rows, class_counts }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Sorted distinct labels.
    pub fn classes(&self) -> Vec<String> {
        self.class_counts.keys().cloned().collect()
    }

    /// Distinct signals in column order.
    pub fn signals(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.feature_names.iter().map(|f| signal_of(f)).filter(|s| seen.insert(*s)).map(str::to_string).collect()
    }

    /// Keep only the feature columns of `keep`, in original relative order.
    pub fn restrict_signals(&self, keep: &HashSet<String>) -> Dataset {
        let cols: Vec<usize> = (0..self.n_features()).filter(|&i| keep.contains(signal_of(&self.feature_names[i]))).collect();
        let feature_names = cols.iter().map(|&i| self.feature_names[i].clone()).collect();
        let rows = self
            .rows
            .iter()
            .map(|r| Sample {
                scenario_id: r.scenario_id.clone(),
                label: r.label.clone(),
                features: cols.iter().map(|&i| r.features[i]).collect(),
            })
            .collect();
        Dataset { feature_names, rows, class_counts: self.class_counts.clone() }
    }

    /// CSV with header `scenario_id,label,<features>`, values printed with
    /// six decimals so file size does not depend on the window length.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<W, ExtractError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = Vec::with_capacity(self.n_features() + 2);
        header.push("scenario_id");
        header.push("label");
        header.extend(self.feature_names.iter().map(String::as_str));
        w.write_record(&header)?;
        let mut rec: Vec<String> = Vec::with_capacity(self.n_features() + 2);
        for r in &self.rows {
            rec.clear();
            rec.push(r.scenario_id.clone());
            rec.push(r.label.clone());
            rec.extend(r.features.iter().map(|v| fmt_value(*v)));
            w.write_record(&rec)?;
        }
        w.into_inner().map_err(|e| ExtractError::Io(e.into_error()))
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        self.write_csv(Vec::new()).expect("in-memory write")
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Dataset, ExtractError> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        if header.len() < 2 || &header[0] != "scenario_id" || &header[1] != "label" {
            return Err(ExtractError::Malformed("header must start with scenario_id,label".into()));
        }
        let feature_names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let features = rec
                .iter()
                .skip(2)
                .map(|v| v.parse::<f64>().map_err(|_| ExtractError::Malformed(format!("row {}: bad number `{v}`", i + 1))))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(Sample { scenario_id: rec[0].to_string(), label: rec[1].to_string(), features });
        }
        Ok(Dataset::new(feature_names, rows))
    }
}
