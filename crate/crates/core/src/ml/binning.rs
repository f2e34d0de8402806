// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

pub const MAX_BINS: usize = 255;

/// Per-feature cut points. A value falls in bin `b` iff it is greater than
/// `cuts[b-1]` and not greater than `cuts[b]`, so "bin <= b" is the same test
/// as "value <= cuts[b]".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binner {
    pub cuts: Vec<Vec<f64>>,
}

/// Column-major binned matrix.
pub struct Binned {
    pub cols: Vec<Vec<u8>>,
    pub n_rows: usize,
}

impl Binner {
    /// Midpoints between distinct values, or quantile cuts when a feature has
    /// more than [`MAX_BINS`] distinct values.
    pub fn fit(rows: &[&[f64]], n_features: usize) -> Binner {
        let mut cuts = Vec::with_capacity(n_features);
        let mut col = Vec::with_capacity(rows.len());
        for f in 0..n_features {
            col.clear();
            col.extend(rows.iter().map(|r| r[f]));
            col.sort_unstable_by(f64::total_cmp);
            col.dedup();
            let c: Vec<f64> = if col.len() <= MAX_BINS {
                col.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0).collect()
            } else {
                let mut c: Vec<f64> = (1..MAX_BINS)
                    .map(|i| {
                        let pos = i * (col.len() - 1) / MAX_BINS;
                        col[pos] + (col[pos + 1] - col[pos]) / 2.0
                    })
                    .collect();
                c.dedup();
                c
            };
            cuts.push(c);
        }
        Binner { cuts }
    }

    pub fn bin(&self, f: usize, v: f64) -> u8 {
        self.cuts[f].partition_point(|c| *c < v) as u8
    }

    pub fn n_bins(&self, f: usize) -> usize {
        self.cuts[f].len() + 1
    }

    pub fn transform(&self, rows: &[&[f64]]) -> Binned {
        let cols = (0..self.cuts.len()).map(|f| rows.iter().map(|r| self.bin(f, r[f])).collect()).collect();
        Binned { cols, n_rows: rows.len() }
    }

    /// Raw-value threshold equivalent to "bin <= b".
    pub fn threshold(&self, f: usize, b: usize) -> f64 {
        self.cuts[f][b]
    }
}
