// SPDX-License-Identifier: Apache-2.0

use super::binning::{Binned, Binner};
use super::tree::{fit_class_tree, ClassTreeParams, Tree};
use crate::seed;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Features tried per split; `None` means `sqrt(n_features)`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 100, max_depth: None, min_samples_split: 2, min_samples_leaf: 1, max_features: None, bootstrap: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub binner: Binner,
    pub trees: Vec<Tree<u16>>,
    pub n_classes: usize,
}

impl Forest {
    pub fn fit(rows: &[&[f64]], y: &[u16], n_classes: usize, n_features: usize, p: &ForestParams, seed_root: u64) -> Forest {
        let binner = Binner::fit(rows, n_features);
        let binned: Binned = binner.transform(rows);
        let mtry = p.max_features.unwrap_or_else(|| ((n_features as f64).sqrt() as usize).max(1)).clamp(1, n_features.max(1));
        let tp = ClassTreeParams {
            max_depth: p.max_depth,
            min_samples_split: p.min_samples_split.max(2),
            min_samples_leaf: p.min_samples_leaf.max(1),
            max_features: mtry,
        };
        let n = rows.len();
        let trees = (0..p.n_trees.max(1))
            .into_par_iter()
            .map(|t| {
                let mut rng = seed::rng(seed_root, "forest.tree", t as u64);
                let sample: Vec<u32> =
                    if p.bootstrap { (0..n).map(|_| rng.gen_range(0..n as u32)).collect() } else { (0..n as u32).collect() };
                fit_class_tree(&binned, &binner, y, n_classes, sample, &tp, &mut rng)
            })
            .collect();
        Forest { binner, trees, n_classes }
    }

    /// Fraction of trees voting for each class.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut votes = vec![0.0; self.n_classes];
        for t in &self.trees {
            votes[*t.leaf(x) as usize] += 1.0;
        }
        let n = self.trees.len() as f64;
        votes.iter_mut().for_each(|v| *v /= n);
        votes
    }
}
