//! Decision-tree core: CART with Gini impurity, grown to purity, shared by
//! the random-forest classifier (exhaustive midpoint thresholds on bootstrap
//! samples) and the extremely-randomized-trees importance ranker (one uniform
//! threshold per candidate feature, no bootstrap).
//!
//! Split policy: at each node a fresh random permutation of the features is
//! walked until `max(1, ⌊fraction·d⌋)` non-constant candidates have been
//! evaluated (constant features never count); the best split by impurity
//! decrease wins, ties resolved by lowest feature index then lowest
//! threshold. Impure nodes split even at zero gain as long as any
//! non-constant feature remains, so an unrestricted tree always reaches
//! training accuracy 1.0 on conflict-free data.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{stream, tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ForestMode {
    RandomForest,
    ExtraTrees,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Node {
    Split { feature: u32, threshold: f64, left: u32, right: u32 },
    Leaf { counts: Vec<u32> },
}

/// One fitted tree: arena of nodes (0 = root) plus raw, unnormalized Gini
/// importance accumulated during growth.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    pub importance_raw: Vec<f64>,
    pub n_splits: usize,
}

impl Tree {
    /// Leaf class counts reached by one feature row.
    pub fn leaf_counts(&self, row: &[f64]) -> &[u32] {
        let mut at = 0u32;
        loop {
            match &self.nodes[at as usize] {
                Node::Leaf { counts } => return counts,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[*feature as usize] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        argmax_tie_low(&normalized(self.leaf_counts(row)))
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub max_features_fraction: f64,
    pub mode: ForestMode,
    pub seed: u64,
}

impl ForestParams {
    pub fn new(mode: ForestMode, n_estimators: usize, max_features_fraction: f64, seed: u64) -> Self {
        ForestParams { n_estimators, max_features_fraction, mode, seed }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub n_estimators: usize,
    pub max_features_fraction: f64,
    pub bootstrap: bool,
    pub mode: ForestMode,
    pub seed: u64,
    pub n_features: usize,
    pub n_classes: usize,
}

fn validate_training_input(x: &[f64], y: &[usize], d: usize, n_classes: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::validation("need at least one feature"));
    }
    if x.is_empty() || y.is_empty() {
        return Err(Error::validation("cannot fit a tree on empty data"));
    }
    if x.len() != y.len() * d {
        return Err(Error::validation(format!(
            "feature matrix length {} does not match {} rows × {} features",
            x.len(),
            y.len(),
            d
        )));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(Error::validation(format!(
            "label {bad} out of range for {n_classes} classes"
        )));
    }
    Ok(y.len())
}

fn gini(counts: &[u32], total: f64) -> f64 {
    let mut sum_sq = 0.0;
    for &c in counts {
        let p = c as f64 / total;
        sum_sq += p * p;
    }
    1.0 - sum_sq
}

fn normalized(counts: &[u32]) -> Vec<f64> {
    let total: u32 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

fn argmax_tie_low(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in v.iter().enumerate().skip(1) {
        if p > v[best] {
            best = i;
        }
    }
    best
}

struct Grower<'a> {
    x: &'a [f64],
    y: &'a [usize],
    d: usize,
    n_classes: usize,
    mode: ForestMode,
    m_candidates: usize,
    // Scratch reused across nodes.
    feature_order: Vec<u32>,
    pairs: Vec<(f64, u32)>,
}

struct BestSplit {
    decrease: f64,
    feature: usize,
    threshold: f64,
}

impl<'a> Grower<'a> {
    fn value(&self, row: u32, feature: usize) -> f64 {
        self.x[row as usize * self.d + feature]
    }

    fn class_counts(&self, idx: &[u32]) -> Vec<u32> {
        let mut counts = vec![0u32; self.n_classes];
        for &i in idx {
            counts[self.y[i as usize]] += 1;
        }
        counts
    }

    /// Pick the best split for one node, or None if every feature is
    /// constant within it.
    fn find_split(
        &mut self,
        idx: &[u32],
        node_gini: f64,
        rng: &mut impl Rng,
    ) -> Option<BestSplit> {
        let n = idx.len() as f64;
        self.feature_order.clear();
        self.feature_order.extend(0..self.d as u32);
        self.feature_order.shuffle(rng);
        let order = std::mem::take(&mut self.feature_order);

        let mut best: Option<BestSplit> = None;
        let mut evaluated = 0usize;
        for &f in &order {
            if evaluated >= self.m_candidates {
                break;
            }
            let f = f as usize;
            self.pairs.clear();
            for &i in idx {
                self.pairs.push((self.value(i, f), i));
            }
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &(v, _) in &self.pairs {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if lo == hi {
                continue; // constant here; does not count toward m
            }
            evaluated += 1;

            let candidate = match self.mode {
                ForestMode::RandomForest => self.best_midpoint_split(f, node_gini, n),
                ForestMode::ExtraTrees => {
                    let threshold = rng.gen_range(lo..hi);
                    Some(self.scored_split(f, threshold, node_gini, n))
                }
            };
            if let Some(c) = candidate {
                let better = match &best {
                    None => true,
                    Some(b) => {
                        c.decrease > b.decrease
                            || (c.decrease == b.decrease
                                && (c.feature < b.feature
                                    || (c.feature == b.feature && c.threshold < b.threshold)))
                    }
                };
                if better {
                    best = Some(c);
                }
            }
        }
        self.feature_order = order;
        best
    }

    /// Exhaustive scan over midpoints of sorted unique values (uses the
    /// already-gathered `pairs`).
    fn best_midpoint_split(&mut self, feature: usize, node_gini: f64, n: f64) -> Option<BestSplit> {
        self.pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let mut left = vec![0u32; self.n_classes];
        let mut right = self.class_counts_from_pairs();
        let mut best: Option<BestSplit> = None;
        for w in 0..self.pairs.len() - 1 {
            let (v, i) = self.pairs[w];
            let c = self.y[i as usize];
            left[c] += 1;
            right[c] -= 1;
            let next = self.pairs[w + 1].0;
            if v < next {
                let mut threshold = (v + next) / 2.0;
                if threshold >= next {
                    threshold = v; // midpoint rounded up to the right edge
                }
                let nl = (w + 1) as f64;
                let nr = n - nl;
                let decrease = node_gini - (nl * gini(&left, nl) + nr * gini(&right, nr)) / n;
                let better = match &best {
                    None => true,
                    Some(b) => decrease > b.decrease,
                };
                if better {
                    best = Some(BestSplit { decrease, feature, threshold });
                }
            }
        }
        best
    }

    fn class_counts_from_pairs(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.n_classes];
        for &(_, i) in &self.pairs {
            counts[self.y[i as usize]] += 1;
        }
        counts
    }

    /// Score a fixed threshold on `feature` (uses the gathered `pairs`).
    fn scored_split(&self, feature: usize, threshold: f64, node_gini: f64, n: f64) -> BestSplit {
        let mut left = vec![0u32; self.n_classes];
        let mut right = vec![0u32; self.n_classes];
        for &(v, i) in &self.pairs {
            let c = self.y[i as usize];
            if v <= threshold {
                left[c] += 1;
            } else {
                right[c] += 1;
            }
        }
        let nl: u32 = left.iter().sum();
        let nr: u32 = right.iter().sum();
        let (nl, nr) = (nl as f64, nr as f64);
        let decrease = node_gini - (nl * gini(&left, nl) + nr * gini(&right, nr)) / n;
        BestSplit { decrease, feature, threshold }
    }
}

/// Grow a single tree over the rows listed in `idx` (duplicates allowed —
/// that is how bootstrap resampling is expressed).
pub fn fit_tree_on(
    x: &[f64],
    y: &[usize],
    d: usize,
    n_classes: usize,
    idx: Vec<u32>,
    mode: ForestMode,
    max_features_fraction: f64,
    rng: &mut impl Rng,
) -> Result<Tree> {
    validate_training_input(x, y, d, n_classes)?;
    if idx.is_empty() {
        return Err(Error::validation("cannot fit a tree on an empty sample"));
    }
    if !(max_features_fraction > 0.0 && max_features_fraction <= 1.0) {
        return Err(Error::validation(format!(
            "max_features_fraction must be in (0, 1], got {max_features_fraction}"
        )));
    }
    let m = ((max_features_fraction * d as f64).floor() as usize).clamp(1, d);
    let mut grower = Grower {
        x,
        y,
        d,
        n_classes,
        mode,
        m_candidates: m,
        feature_order: Vec::with_capacity(d),
        pairs: Vec::new(),
    };

    let n_root = idx.len() as f64;
    let mut indices = idx;
    let mut tree = Tree { nodes: Vec::new(), importance_raw: vec![0.0; d], n_splits: 0 };
    // Stack of (start, end) ranges into `indices`; children partition their
    // parent's range in place. Node ids are assigned on push so traversal
    // order (and therefore RNG consumption) is deterministic.
    tree.nodes.push(Node::Leaf { counts: vec![] });
    let mut stack = vec![(0usize, indices.len(), 0u32)];

    while let Some((start, end, slot)) = stack.pop() {
        let node_idx = &indices[start..end];
        let counts = grower.class_counts(node_idx);
        let n = (end - start) as f64;
        let node_gini = gini(&counts, n);
        let split = if node_gini > 0.0 {
            grower.find_split(node_idx, node_gini, rng)
        } else {
            None
        };
        match split {
            None => {
                tree.nodes[slot as usize] = Node::Leaf { counts };
            }
            Some(best) => {
                let mid = partition_in_place(&mut indices[start..end], |i| {
                    x[i as usize * d + best.feature] <= best.threshold
                }) + start;
                debug_assert!(mid > start && mid < end);
                tree.importance_raw[best.feature] += (n / n_root) * best.decrease;
                tree.n_splits += 1;
                let left = tree.nodes.len() as u32;
                tree.nodes.push(Node::Leaf { counts: vec![] });
                let right = tree.nodes.len() as u32;
                tree.nodes.push(Node::Leaf { counts: vec![] });
                tree.nodes[slot as usize] = Node::Split {
                    feature: best.feature as u32,
                    threshold: best.threshold,
                    left,
                    right,
                };
                // Right first so the left child is grown first (LIFO).
                stack.push((mid, end, right));
                stack.push((start, mid, left));
            }
        }
    }
    Ok(tree)
}

/// Stable-order-free in-place partition; returns the split point.
fn partition_in_place(slice: &mut [u32], pred: impl Fn(u32) -> bool) -> usize {
    let mut store = 0usize;
    for i in 0..slice.len() {
        if pred(slice[i]) {
            slice.swap(store, i);
            store += 1;
        }
    }
    store
}

/// Convenience wrapper: single tree on the full sample.
pub fn fit_tree(
    x: &[f64],
    y: &[usize],
    d: usize,
    n_classes: usize,
    mode: ForestMode,
    max_features_fraction: f64,
    seed: u64,
) -> Result<Tree> {
    let n = validate_training_input(x, y, d, n_classes)?;
    let mut rng = stream(seed, &[tag::TREE, 0]);
    fit_tree_on(
        x,
        y,
        d,
        n_classes,
        (0..n as u32).collect(),
        mode,
        max_features_fraction,
        &mut rng,
    )
}

/// Fit the ensemble: RandomForest mode bootstraps per tree, ExtraTrees uses
/// the full sample. Per-tree RNG streams are keyed by (seed, tree index), so
/// results are independent of thread scheduling.
pub fn fit_forest(
    x: &[f64],
    y: &[usize],
    d: usize,
    n_classes: usize,
    params: &ForestParams,
) -> Result<ForestModel> {
    let n = validate_training_input(x, y, d, n_classes)?;
    if params.n_estimators == 0 {
        return Err(Error::validation("n_estimators must be >= 1"));
    }
    let bootstrap = params.mode == ForestMode::RandomForest;
    let trees: Result<Vec<Tree>> = (0..params.n_estimators)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(params.seed, &[tag::TREE, t as u64]);
            let idx: Vec<u32> = if bootstrap {
                (0..n).map(|_| rng.gen_range(0..n as u32)).collect()
            } else {
                (0..n as u32).collect()
            };
            fit_tree_on(x, y, d, n_classes, idx, params.mode, params.max_features_fraction, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        trees: trees?,
        n_estimators: params.n_estimators,
        max_features_fraction: params.max_features_fraction,
        bootstrap,
        mode: params.mode,
        seed: params.seed,
        n_features: d,
        n_classes,
    })
}

/// Average of per-tree normalized leaf distributions; label = argmax with
/// ties to the lowest class index.
pub fn predict_forest(model: &ForestModel, x: &[f64], d: usize) -> Result<(Vec<usize>, Vec<f64>)> {
    if d != model.n_features {
        return Err(Error::validation(format!(
            "query dimension {d} does not match model dimension {}",
            model.n_features
        )));
    }
    if x.len() % d != 0 {
        return Err(Error::validation("query matrix length not a multiple of d"));
    }
    let n = x.len() / d;
    let nc = model.n_classes;
    let probs: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let row = &x[i * d..(i + 1) * d];
            let mut acc = vec![0.0f64; nc];
            for tree in &model.trees {
                let counts = tree.leaf_counts(row);
                let total: u32 = counts.iter().sum();
                for (a, &c) in acc.iter_mut().zip(counts) {
                    *a += c as f64 / total as f64;
                }
            }
            let t = model.trees.len() as f64;
            acc.into_iter().map(move |v| v / t)
        })
        .collect();
    let labels = probs.chunks(nc).map(argmax_tie_low).collect();
    Ok((labels, probs))
}

/// Mean of per-tree normalized Gini importances over trees that split at
/// least once; errors when no tree split at all.
pub fn gini_importance(model: &ForestModel) -> Result<Vec<f64>> {
    let mut acc = vec![0.0f64; model.n_features];
    let mut contributing = 0usize;
    for tree in &model.trees {
        if tree.n_splits == 0 {
            continue;
        }
        let total: f64 = tree.importance_raw.iter().sum();
        if total <= 0.0 {
            // Splits existed but none decreased impurity (conflicting
            // duplicates); normalization is undefined, skip the tree.
            continue;
        }
        for (a, &v) in acc.iter_mut().zip(&tree.importance_raw) {
            *a += v / total;
        }
        contributing += 1;
    }
    if contributing == 0 {
        return Err(Error::validation(
            "importance undefined: no tree in the forest contains an impurity-decreasing split",
        ));
    }
    for a in acc.iter_mut() {
        *a /= contributing as f64;
    }
    Ok(acc)
}
