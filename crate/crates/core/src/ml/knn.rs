// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

/// Stored training points, z-scored with training statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub mean: Vec<f64>,
    /// Population std; constant features use 1 so they contribute nothing.
    pub scale: Vec<f64>,
    pub points: Vec<f64>,
    pub labels: Vec<u16>,
    pub n_classes: usize,
}

impl Knn {
    pub fn fit(rows: &[&[f64]], y: &[u16], n_classes: usize, n_features: usize, p: &KnnParams) -> Knn {
        let n = rows.len() as f64;
        let mut mean = vec![0.0; n_features];
        for r in rows {
            mean.iter_mut().zip(r.iter()).for_each(|(m, v)| *m += v / n);
        }
        let mut scale = vec![0.0; n_features];
        for r in rows {
            scale.iter_mut().zip(r.iter().zip(&mean)).for_each(|(s, (v, m))| *s += (v - m) * (v - m) / n);
        }
        scale.iter_mut().for_each(|s| *s = if *s > 0.0 { s.sqrt() } else { 1.0 });
        let mut points = Vec::with_capacity(rows.len() * n_features);
        for r in rows {
            points.extend(r.iter().enumerate().map(|(f, v)| (v - mean[f]) / scale[f]));
        }
        Knn { k: p.k.clamp(1, rows.len()), mean, scale, points, labels: y.to_vec(), n_classes }
    }

    /// Vote fractions among the `k` nearest points; distance ties go to the
    /// earlier training row.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let d = self.mean.len();
        let z: Vec<f64> = x.iter().enumerate().map(|(f, v)| (v - self.mean[f]) / self.scale[f]).collect();
        let mut dist: Vec<(f64, usize)> = self
            .points
            .chunks_exact(d.max(1))
            .enumerate()
            .map(|(i, p)| (p.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, cmp);
        }
        let mut votes = vec![0.0; self.n_classes];
        for &(_, i) in dist.iter().take(self.k) {
            votes[self.labels[i] as usize] += 1.0;
        }
        votes.iter_mut().for_each(|v| *v /= self.k as f64);
        votes
    }
}
