// SPDX-License-Identifier: Apache-2.0

use super::{ExtractError, WaveWindow};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stat {
    Mean,
    /// Sample standard deviation (ddof = 1); 0 for a single sample.
    Std,
    Min,
    Max,
    /// Linearly interpolated quantile at the given percent.
    Quantile(u8),
}

impl fmt::Display for Stat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stat::Mean => f.write_str("mean"),
            Stat::Std => f.write_str("std"),
            Stat::Min => f.write_str("min"),
            Stat::Max => f.write_str("max"),
            Stat::Quantile(p) => write!(f, "q{p}"),
        }
    }
}

impl FromStr for Stat {
    type Err = ExtractError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ExtractError::UnknownStat(s.to_string());
        Ok(match s.trim() {
            "mean" => Stat::Mean,
            "std" => Stat::Std,
            "min" => Stat::Min,
            "max" => Stat::Max,
            "median" => Stat::Quantile(50),
            q if q.starts_with('q') => {
                let p: u8 = q[1..].parse().map_err(|_| bad())?;
                if p > 100 {
                    return Err(bad());
                }
                Stat::Quantile(p)
            }
            _ => return Err(bad()),
        })
    }
}

/// Ordered statistics computed per signal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatSet(pub Vec<Stat>);

impl Default for StatSet {
    fn default() -> Self {
        use Stat::*;
        StatSet(vec![Mean, Std, Min, Max, Quantile(10), Quantile(25), Quantile(50), Quantile(75), Quantile(90)])
    }
}

impl StatSet {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromStr for StatSet {
    type Err = ExtractError;

    /// Comma-separated list, e.g. `mean,std,q50`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let stats = s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect::<Result<Vec<Stat>, _>>()?;
        if stats.is_empty() {
            return Err(ExtractError::UnknownStat(s.to_string()));
        }
        Ok(StatSet(stats))
    }
}

impl fmt::Display for StatSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.0.iter().map(Stat::to_string).collect();
        f.write_str(&names.join(","))
    }
}

/// One compressed waveform: `d * n` values laid out signal-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub features: Vec<f64>,
    pub feature_names: Vec<String>,
    pub label: String,
    pub scenario_id: String,
}

/// Quantile of sorted data with linear interpolation between closest ranks.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Statistics of one column, in `stats` order. `values` must be nonempty.
pub fn column_stats(values: &mut [f64], stats: &StatSet, out: &mut Vec<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mut sorted_ready = false;
    for stat in &stats.0 {
        let v = match stat {
            Stat::Mean => mean,
            Stat::Std => {
                if values.len() < 2 {
                    0.0
                } else {
                    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
                }
            }
            Stat::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
            Stat::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Stat::Quantile(p) => {
                if !sorted_ready {
                    values.sort_unstable_by(f64::total_cmp);
                    sorted_ready = true;
                }
                quantile(values, *p as f64 / 100.0)
            }
        };
        out.push(v);
    }
}

/// Compress a standardized window to one feature row named
/// `<full_name>__<stat>`.
pub fn summarize(w: &WaveWindow, stats: &StatSet) -> FeatureRow {
    let d = w.cols();
    let mut features = Vec::with_capacity(d * stats.len());
    let mut feature_names = Vec::with_capacity(d * stats.len());
    let mut col = Vec::with_capacity(w.rows());
    for (c, name) in w.signals.iter().enumerate() {
        col.clear();
        col.extend(w.column(c));
        if col.is_empty() {
            features.extend(std::iter::repeat_n(0.0, stats.len()));
        } else {
            column_stats(&mut col, stats, &mut features);
        }
        feature_names.extend(stats.0.iter().map(|s| format!("{name}__{s}")));
    }
    FeatureRow { features, feature_names, label: w.label.clone(), scenario_id: w.scenario_id.clone() }
}
