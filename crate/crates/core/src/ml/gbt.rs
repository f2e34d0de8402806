// SPDX-License-Identifier: Apache-2.0

use super::binning::Binner;
use super::tree::{fit_reg_tree, Growth, RegTreeParams, Tree};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbtParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    /// Level-wise depth limit. Ignored by leaf-wise growth when `None`.
    pub max_depth: Option<usize>,
    pub max_leaves: Option<usize>,
    pub lambda: f64,
    pub min_child_weight: f64,
    pub growth: Growth,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            n_rounds: 100,
            learning_rate: 0.1,
            max_depth: Some(6),
            max_leaves: None,
            lambda: 1.0,
            min_child_weight: 1.0,
            growth: Growth::LevelWise,
        }
    }
}

impl GbtParams {
    /// Leaf-wise preset: 31 leaves, no depth limit.
    pub fn leaf_wise() -> Self {
        GbtParams { growth: Growth::LeafWise, max_depth: None, max_leaves: Some(31), ..Default::default() }
    }
}

/// Softmax boosting: one regression tree per class per round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gbt {
    /// `rounds[r][k]` is the class-`k` tree of round `r`.
    pub rounds: Vec<Vec<Tree<f64>>>,
    pub n_classes: usize,
    /// Total split gain per feature.
    pub importance: Vec<f64>,
}

pub fn softmax(scores: &[f64], out: &mut [f64]) {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, s) in out.iter_mut().zip(scores) {
        *o = (s - m).exp();
        sum += *o;
    }
    out.iter_mut().for_each(|o| *o /= sum);
}

impl Gbt {
    pub fn fit(rows: &[&[f64]], y: &[u16], n_classes: usize, n_features: usize, p: &GbtParams) -> Gbt {
        let binner = Binner::fit(rows, n_features);
        let binned = binner.transform(rows);
        let n = rows.len();
        let k = n_classes;
        let tp = RegTreeParams {
            max_depth: p.max_depth,
            max_leaves: p.max_leaves,
            lambda: p.lambda,
            min_child_weight: p.min_child_weight,
            learning_rate: p.learning_rate,
            growth: p.growth,
        };
        let mut scores = vec![0.0; n * k];
        let mut prob = vec![0.0; n * k];
        let mut importance = vec![0.0; n_features];
        let mut rounds = Vec::with_capacity(p.n_rounds);
        for _ in 0..p.n_rounds {
            for i in 0..n {
                softmax(&scores[i * k..(i + 1) * k], &mut prob[i * k..(i + 1) * k]);
            }
            let fitted: Vec<(Tree<f64>, Vec<f64>)> = (0..k)
                .into_par_iter()
                .map(|c| {
                    let mut grad = Vec::with_capacity(n);
                    let mut hess = Vec::with_capacity(n);
                    for i in 0..n {
                        let pk = prob[i * k + c];
                        let target = if y[i] as usize == c { 1.0 } else { 0.0 };
                        grad.push(pk - target);
                        hess.push((pk * (1.0 - pk)).max(1e-16));
                    }
                    let mut imp = vec![0.0; n_features];
                    let tree = fit_reg_tree(&binned, &binner, &grad, &hess, &tp, &mut imp);
                    (tree, imp)
                })
                .collect();
            let mut trees = Vec::with_capacity(k);
            for (c, (tree, imp)) in fitted.into_iter().enumerate() {
                for i in 0..n {
                    scores[i * k + c] += *tree.leaf_binned(&binned, &binner, i);
                }
                importance.iter_mut().zip(&imp).for_each(|(a, b)| *a += b);
                trees.push(tree);
            }
            rounds.push(trees);
        }
        Gbt { rounds, n_classes, importance }
    }

    pub fn raw_scores(&self, x: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.n_classes];
        for round in &self.rounds {
            for (c, t) in round.iter().enumerate() {
                s[c] += *t.leaf(x);
            }
        }
        s
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let s = self.raw_scores(x);
        let mut p = vec![0.0; self.n_classes];
        softmax(&s, &mut p);
        p
    }
}
