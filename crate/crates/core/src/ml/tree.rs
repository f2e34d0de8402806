// SPDX-License-Identifier: Apache-2.0

//! Histogram tree learners over binned features: a Gini classification
//! tree for the forest and a second-order regression tree for boosting.

use super::binning::{Binned, Binner};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BinaryHeap;

/// Go left iff `x[feature] <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node<L> {
    Split { feature: u32, threshold: f64, left: u32, right: u32 },
    Leaf(L),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree<L> {
    pub nodes: Vec<Node<L>>,
}

impl<L> Tree<L> {
    pub fn leaf(&self, x: &[f64]) -> &L {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[*feature as usize] <= *threshold { *left } else { *right } as usize;
                }
            }
        }
    }

    /// Leaf reached by row `row` of the training matrix.
    pub fn leaf_binned(&self, binned: &Binned, binner: &Binner, row: usize) -> &L {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split { feature, threshold, left, right } => {
                    let f = *feature as usize;
                    let b = binned.cols[f][row] as usize;
                    // thresholds are taken from the strictly increasing cut list
                    let go_left = b < binner.cuts[f].len() && binner.cuts[f][b] <= *threshold;
                    i = if go_left { *left } else { *right } as usize;
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk<L>(t: &Tree<L>, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(t, *left as usize).max(walk(t, *right as usize)),
            }
        }
        walk(self, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ClassTreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Features examined per split before settling for the best valid one.
    pub max_features: usize,
}

struct Candidate {
    feature: usize,
    bin: usize,
    score: f64,
}

/// Gini tree on the (possibly repeated) row indices `rows`. Leaves hold the
/// majority class, ties to the lowest class index.
pub fn fit_class_tree<R: Rng>(
    binned: &Binned,
    binner: &Binner,
    y: &[u16],
    n_classes: usize,
    mut rows: Vec<u32>,
    params: &ClassTreeParams,
    rng: &mut R,
) -> Tree<u16> {
    let n_features = binned.cols.len();
    let mut nodes: Vec<Node<u16>> = Vec::new();
    let mut order: Vec<usize> = (0..n_features).collect();
    let mut hist = vec![0u32; 256 * n_classes];
    let mut counts = vec![0u32; n_classes];
    // (node index, start, end, depth)
    let mut stack = vec![(0usize, 0usize, rows.len(), 0usize)];
    nodes.push(Node::Leaf(0));
    while let Some((id, start, end, depth)) = stack.pop() {
        let slice = &mut rows[start..end];
        counts.iter_mut().for_each(|c| *c = 0);
        for &r in slice.iter() {
            counts[y[r as usize] as usize] += 1;
        }
        let majority = counts.iter().enumerate().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0))).map_or(0, |(k, _)| k) as u16;
        nodes[id] = Node::Leaf(majority);
        let n = slice.len();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || n < params.min_samples_split || params.max_depth.is_some_and(|d| depth >= d) || n < 2 * params.min_samples_leaf {
            continue;
        }
        order.shuffle(rng);
        let mut best: Option<Candidate> = None;
        let mut visited = 0usize;
        for &f in &order {
            if visited >= params.max_features && best.is_some() {
                break;
            }
            let nb = binner.n_bins(f);
            if nb < 2 {
                continue;
            }
            let h = &mut hist[..nb * n_classes];
            h.iter_mut().for_each(|c| *c = 0);
            let col = &binned.cols[f];
            for &r in slice.iter() {
                h[col[r as usize] as usize * n_classes + y[r as usize] as usize] += 1;
            }
            let occupied = (0..nb).filter(|b| h[b * n_classes..(b + 1) * n_classes].iter().any(|&c| c > 0)).count();
            if occupied < 2 {
                continue;
            }
            visited += 1;
            let mut left = vec![0u32; n_classes];
            let mut n_left = 0usize;
            for b in 0..nb - 1 {
                let row = &h[b * n_classes..(b + 1) * n_classes];
                if row.iter().all(|&c| c == 0) {
                    continue;
                }
                for k in 0..n_classes {
                    left[k] += row[k];
                }
                n_left += row.iter().sum::<u32>() as usize;
                let n_right = n - n_left;
                if n_left < params.min_samples_leaf || n_right < params.min_samples_leaf {
                    continue;
                }
                if n_right == 0 {
                    break;
                }
                let mut sl = 0.0;
                let mut sr = 0.0;
                for k in 0..n_classes {
                    let l = left[k] as f64;
                    let r = (counts[k] - left[k]) as f64;
                    sl += l * l;
                    sr += r * r;
                }
                let score = sl / n_left as f64 + sr / n_right as f64;
                if best.as_ref().is_none_or(|c| score > c.score + 1e-12) {
                    best = Some(Candidate { feature: f, bin: b, score });
                }
            }
        }
        let Some(c) = best else { continue };
        let col = &binned.cols[c.feature];
        let mid = partition(slice, |r| col[r as usize] as usize <= c.bin);
        let left = nodes.len() as u32;
        nodes.push(Node::Leaf(0));
        nodes.push(Node::Leaf(0));
        nodes[id] = Node::Split { feature: c.feature as u32, threshold: binner.threshold(c.feature, c.bin), left, right: left + 1 };
        stack.push((left as usize + 1, start + mid, end, depth + 1));
        stack.push((left as usize, start, start + mid, depth + 1));
    }
    Tree { nodes }
}

/// In-place partition. Returns the number of rows satisfying `pred`.
fn partition(slice: &mut [u32], pred: impl Fn(u32) -> bool) -> usize {
    let mut i = 0;
    for j in 0..slice.len() {
        if pred(slice[j]) {
            slice.swap(i, j);
            i += 1;
        }
    }
    i
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    LevelWise,
    LeafWise,
}

#[derive(Debug, Clone, Copy)]
pub struct RegTreeParams {
    pub max_depth: Option<usize>,
    pub max_leaves: Option<usize>,
    pub lambda: f64,
    pub min_child_weight: f64,
    pub learning_rate: f64,
    pub growth: Growth,
}

struct RegSplit {
    gain: f64,
    feature: usize,
    bin: usize,
}

struct Pending {
    id: usize,
    start: usize,
    end: usize,
    depth: usize,
    g: f64,
    h: f64,
    split: Option<RegSplit>,
}

fn best_reg_split(
    binned: &Binned,
    binner: &Binner,
    grad: &[f64],
    hess: &[f64],
    rows: &[u32],
    g_sum: f64,
    h_sum: f64,
    p: &RegTreeParams,
    hist: &mut [(f64, f64)],
) -> Option<RegSplit> {
    let parent = g_sum * g_sum / (h_sum + p.lambda);
    let mut best: Option<RegSplit> = None;
    for f in 0..binned.cols.len() {
        let nb = binner.n_bins(f);
        if nb < 2 {
            continue;
        }
        let h = &mut hist[..nb];
        h.iter_mut().for_each(|e| *e = (0.0, 0.0));
        let col = &binned.cols[f];
        for &r in rows {
            let e = &mut h[col[r as usize] as usize];
            e.0 += grad[r as usize];
            e.1 += hess[r as usize];
        }
        let (mut gl, mut hl) = (0.0, 0.0);
        for (b, e) in h.iter().enumerate().take(nb - 1) {
            gl += e.0;
            hl += e.1;
            let (gr, hr) = (g_sum - gl, h_sum - hl);
            if hl < p.min_child_weight || hr < p.min_child_weight {
                continue;
            }
            let gain = 0.5 * (gl * gl / (hl + p.lambda) + gr * gr / (hr + p.lambda) - parent);
            if gain > 1e-12 && best.as_ref().is_none_or(|c| gain > c.gain) {
                best = Some(RegSplit { gain, feature: f, bin: b });
            }
        }
    }
    best
}

/// Second-order regression tree. Returns the tree (leaf values already
/// scaled by the learning rate) and adds each split's gain to `importance`.
pub fn fit_reg_tree(
    binned: &Binned,
    binner: &Binner,
    grad: &[f64],
    hess: &[f64],
    params: &RegTreeParams,
    importance: &mut [f64],
) -> Tree<f64> {
    let mut rows: Vec<u32> = (0..binned.n_rows as u32).collect();
    let max_bins = (0..binned.cols.len()).map(|f| binner.n_bins(f)).max().unwrap_or(1);
    let mut hist = vec![(0.0, 0.0); max_bins];
    let leaf_value = |g: f64, h: f64| -g / (h + params.lambda) * params.learning_rate;
    let mut nodes: Vec<Node<f64>> = vec![Node::Leaf(0.0)];
    let (g0, h0) = rows.iter().fold((0.0, 0.0), |a, &r| (a.0 + grad[r as usize], a.1 + hess[r as usize]));
    let make = |id, start, end, depth, g, h, rows: &[u32], hist: &mut [(f64, f64)]| {
        let can_split = params.max_depth.is_none_or(|d| depth < d) && end - start >= 2;
        let split = if can_split { best_reg_split(binned, binner, grad, hess, &rows[start..end], g, h, params, hist) } else { None };
        Pending { id, start, end, depth, g, h, split }
    };
    let root = make(0, 0, rows.len(), 0, g0, h0, &rows, &mut hist);
    nodes[0] = Node::Leaf(leaf_value(g0, h0));

    let mut leaves = 1usize;
    match params.growth {
        Growth::LevelWise => {
            let mut level = vec![root];
            while !level.is_empty() {
                let mut next = Vec::new();
                for node in level {
                    let Some(s) = &node.split else { continue };
                    let (l, r) = split_node(&mut nodes, &mut rows, binned, binner, grad, hess, &node, s, importance, &leaf_value);
                    next.push(make(l.0, l.1, l.2, node.depth + 1, l.3, l.4, &rows, &mut hist));
                    next.push(make(r.0, r.1, r.2, node.depth + 1, r.3, r.4, &rows, &mut hist));
                }
                level = next;
            }
        }
        Growth::LeafWise => {
            #[derive(PartialEq)]
            struct ByGain(f64, usize);
            impl Eq for ByGain {}
            impl PartialOrd for ByGain {
                fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
                    Some(self.cmp(o))
                }
            }
            impl Ord for ByGain {
                fn cmp(&self, o: &Self) -> std::cmp::Ordering {
                    // larger gain first, then earlier creation
                    self.0.total_cmp(&o.0).then(o.1.cmp(&self.1))
                }
            }
            let mut pending = vec![root];
            let mut heap = BinaryHeap::new();
            if let Some(s) = &pending[0].split {
                heap.push(ByGain(s.gain, 0));
            }
            let max_leaves = params.max_leaves.unwrap_or(usize::MAX);
            while leaves < max_leaves {
                let Some(ByGain(_, idx)) = heap.pop() else { break };
                let node = std::mem::replace(&mut pending[idx], Pending { id: 0, start: 0, end: 0, depth: 0, g: 0.0, h: 0.0, split: None });
                let s = node.split.as_ref().expect("queued nodes have splits");
                let (l, r) = split_node(&mut nodes, &mut rows, binned, binner, grad, hess, &node, s, importance, &leaf_value);
                leaves += 1;
                for c in [l, r] {
                    let p = make(c.0, c.1, c.2, node.depth + 1, c.3, c.4, &rows, &mut hist);
                    if let Some(s) = &p.split {
                        heap.push(ByGain(s.gain, pending.len()));
                    }
                    pending.push(p);
                }
            }
        }
    }
    Tree { nodes }
}

type ChildInfo = (usize, usize, usize, f64, f64);

#[allow(clippy::too_many_arguments)]
fn split_node(
    nodes: &mut Vec<Node<f64>>,
    rows: &mut [u32],
    binned: &Binned,
    binner: &Binner,
    grad: &[f64],
    hess: &[f64],
    node: &Pending,
    s: &RegSplit,
    importance: &mut [f64],
    leaf_value: &impl Fn(f64, f64) -> f64,
) -> (ChildInfo, ChildInfo) {
    let col = &binned.cols[s.feature];
    let slice = &mut rows[node.start..node.end];
    let mid = partition(slice, |r| col[r as usize] as usize <= s.bin);
    let (gl, hl) = slice[..mid].iter().fold((0.0, 0.0), |a, &r| (a.0 + grad[r as usize], a.1 + hess[r as usize]));
    let (gr, hr) = (node.g - gl, node.h - hl);
    let left = nodes.len();
    nodes.push(Node::Leaf(leaf_value(gl, hl)));
    nodes.push(Node::Leaf(leaf_value(gr, hr)));
    nodes[node.id] =
        Node::Split { feature: s.feature as u32, threshold: binner.threshold(s.feature, s.bin), left: left as u32, right: left as u32 + 1 };
    importance[s.feature] += s.gain;
    ((left, node.start, node.start + mid, gl, hl), (left + 1, node.start + mid, node.end, gr, hr))
}
