//! RBF-kernel support vector classifier trained with sequential minimal
//! optimization (SMO) on the dual, one-vs-one over class pairs.
//!
//! Dual problem per pair: min ½αᵀQα − eᵀα s.t. 0 ≤ α ≤ C, Σ αᵢyᵢ = 0, with
//! Q_ij = yᵢyⱼK(xᵢ,xⱼ). The working pair is the maximal violating pair
//! (first-order selection): with F_i = −yᵢG_i and G = Qα − e,
//! m = max F over I_up, M = min F over I_low, stop when m − M < tol.
//! Intercept b = mean(F) over free vectors (0 < α < C), midpoint (m+M)/2
//! when none are free. Kernel rows are cached lazily per pair.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_GAMMA: f64 = 0.005;
pub const DEFAULT_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvcParams {
    pub c: f64,
    pub gamma: f64,
    pub tol: f64,
    /// Iteration budget per pairwise problem; None derives one from the pair
    /// size.
    pub max_iter: Option<usize>,
}

impl Default for SvcParams {
    fn default() -> Self {
        SvcParams { c: DEFAULT_C, gamma: DEFAULT_GAMMA, tol: DEFAULT_TOL, max_iter: None }
    }
}

impl SvcParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::validation(format!("C must be positive, got {}", self.c)));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::validation(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::validation(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// One binary machine for classes (a, b); class `a` (the lower index) maps
/// to y = +1. Only support vectors (α > 0) are stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMachine {
    pub class_a: usize,
    pub class_b: usize,
    /// Support vectors, row-major m×d.
    pub sv: Vec<f64>,
    /// α_i (dual variables of the stored support vectors).
    pub alpha: Vec<f64>,
    /// y_i ∈ {±1} of the stored support vectors.
    pub sv_y: Vec<f64>,
    pub b: f64,
    /// Final KKT gap m − M.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvcModel {
    pub pairs: Vec<PairMachine>,
    pub classes: Vec<usize>,
    pub params: SvcParams,
    pub d: usize,
    pub n_classes: usize,
    pub warnings: Vec<String>,
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let mut sq = 0.0;
    for (u, v) in a.iter().zip(b) {
        let diff = u - v;
        sq += diff * diff;
    }
    (-gamma * sq).exp()
}

/// Lazily filled kernel-row cache for one pairwise problem.
struct KernelCache<'a> {
    x: &'a [f64],
    d: usize,
    n: usize,
    gamma: f64,
    rows: Vec<Option<Box<[f64]>>>,
}

impl<'a> KernelCache<'a> {
    fn new(x: &'a [f64], d: usize, gamma: f64) -> Self {
        let n = x.len() / d;
        KernelCache { x, d, n, gamma, rows: vec![None; n] }
    }

    fn row(&mut self, i: usize) -> &[f64] {
        if self.rows[i].is_none() {
            let xi = &self.x[i * self.d..(i + 1) * self.d];
            let mut row = Vec::with_capacity(self.n);
            for j in 0..self.n {
                row.push(rbf(xi, &self.x[j * self.d..(j + 1) * self.d], self.gamma));
            }
            self.rows[i] = Some(row.into_boxed_slice());
        }
        self.rows[i].as_deref().unwrap()
    }
}

struct SmoOutcome {
    alpha: Vec<f64>,
    b: f64,
    gap: f64,
    iterations: usize,
    converged: bool,
}

/// SMO on one binary problem. `ys` entries must be ±1.
fn smo(x: &[f64], ys: &[f64], d: usize, params: &SvcParams) -> SmoOutcome {
    let n = ys.len();
    let c = params.c;
    let max_iter = params.max_iter.unwrap_or_else(|| 200 * n.max(500));
    let mut cache = KernelCache::new(x, d, params.gamma);
    let mut alpha = vec![0.0f64; n];
    // G_i = (Qα)_i − 1; starts at −1 with α = 0.
    let mut grad = vec![-1.0f64; n];

    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        // Maximal violating pair on F_i = −y_i G_i; first index wins ties.
        let mut i_up: Option<usize> = None;
        let mut m = f64::NEG_INFINITY;
        let mut j_low: Option<usize> = None;
        let mut mm = f64::INFINITY;
        for t in 0..n {
            let f = -ys[t] * grad[t];
            let in_up = (ys[t] > 0.0 && alpha[t] < c) || (ys[t] < 0.0 && alpha[t] > 0.0);
            let in_low = (ys[t] > 0.0 && alpha[t] > 0.0) || (ys[t] < 0.0 && alpha[t] < c);
            if in_up && f > m {
                m = f;
                i_up = Some(t);
            }
            if in_low && f < mm {
                mm = f;
                j_low = Some(t);
            }
        }
        let (i, j) = match (i_up, j_low) {
            (Some(i), Some(j)) => (i, j),
            _ => {
                gap = 0.0;
                converged = true;
                break;
            }
        };
        gap = m - mm;
        if gap < params.tol {
            converged = true;
            break;
        }
        iterations += 1;

        let kii = cache.row(i)[i];
        let kjj = cache.row(j)[j];
        let kij = cache.row(i)[j];
        let mut quad = kii + kjj - 2.0 * kij;
        if quad <= 0.0 {
            quad = 1e-12;
        }
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if ys[i] != ys[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        let (yi, yj) = (ys[i], ys[j]);
        let row_i = cache.row(i).to_vec();
        let row_j = cache.row(j);
        for t in 0..n {
            grad[t] += ys[t] * (yi * di * row_i[t] + yj * dj * row_j[t]);
        }
    }

    // Intercept from free vectors, midpoint of the violating bounds otherwise.
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    for t in 0..n {
        if alpha[t] > 0.0 && alpha[t] < c {
            free_sum += -ys[t] * grad[t];
            free_count += 1;
        }
    }
    let b = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        let mut m = f64::NEG_INFINITY;
        let mut mm = f64::INFINITY;
        for t in 0..n {
            let f = -ys[t] * grad[t];
            let in_up = (ys[t] > 0.0 && alpha[t] < c) || (ys[t] < 0.0 && alpha[t] > 0.0);
            let in_low = (ys[t] > 0.0 && alpha[t] > 0.0) || (ys[t] < 0.0 && alpha[t] < c);
            if in_up {
                m = m.max(f);
            }
            if in_low {
                mm = mm.min(f);
            }
        }
        (m + mm) / 2.0
    };

    SmoOutcome { alpha, b, gap, iterations, converged }
}

/// Fit one-vs-one machines over every pair of classes present in `y`.
pub fn svc_fit(
    x: &[f64],
    y: &[usize],
    d: usize,
    n_classes: usize,
    params: &SvcParams,
) -> Result<SvcModel> {
    params.validate()?;
    if d == 0 {
        return Err(Error::validation("need at least one feature"));
    }
    if y.is_empty() || x.len() != y.len() * d {
        return Err(Error::validation(format!(
            "feature matrix length {} does not match {} rows × {} features",
            x.len(),
            y.len(),
            d
        )));
    }
    if let Some(&bad) = y.iter().find(|&&cl| cl >= n_classes) {
        return Err(Error::validation(format!(
            "label {bad} out of range for {n_classes} classes"
        )));
    }
    let mut classes: Vec<usize> = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::validation("SVC needs at least two classes present"));
    }

    let mut pair_ids = Vec::new();
    for (ia, &a) in classes.iter().enumerate() {
        for &b in &classes[ia + 1..] {
            pair_ids.push((a, b));
        }
    }
    let pairs: Vec<PairMachine> = pair_ids
        .into_par_iter()
        .map(|(a, b)| {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for (i, &cl) in y.iter().enumerate() {
                if cl == a || cl == b {
                    xs.extend_from_slice(&x[i * d..(i + 1) * d]);
                    ys.push(if cl == a { 1.0 } else { -1.0 });
                }
            }
            let out = smo(&xs, &ys, d, params);
            let mut sv = Vec::new();
            let mut alpha = Vec::new();
            let mut sv_y = Vec::new();
            for (i, &al) in out.alpha.iter().enumerate() {
                if al > 0.0 {
                    sv.extend_from_slice(&xs[i * d..(i + 1) * d]);
                    alpha.push(al);
                    sv_y.push(ys[i]);
                }
            }
            PairMachine {
                class_a: a,
                class_b: b,
                sv,
                alpha,
                sv_y,
                b: out.b,
                gap: out.gap,
                iterations: out.iterations,
                converged: out.converged,
            }
        })
        .collect();

    let warnings: Vec<String> = pairs
        .iter()
        .filter(|p| !p.converged)
        .map(|p| {
            format!(
                "pair ({}, {}) hit the iteration cap after {} iterations (KKT gap {:.3e})",
                p.class_a, p.class_b, p.iterations, p.gap
            )
        })
        .collect();

    Ok(SvcModel { pairs, classes, params: params.clone(), d, n_classes, warnings })
}

/// Decision value Σ αᵢyᵢk(xᵢ, query) + b of one pairwise machine; positive
/// favours `class_a`.
pub fn pair_decision(machine: &PairMachine, gamma: f64, query: &[f64]) -> f64 {
    let d = query.len();
    let mut acc = 0.0;
    for (i, (&al, &yi)) in machine.alpha.iter().zip(&machine.sv_y).enumerate() {
        acc += al * yi * rbf(&machine.sv[i * d..(i + 1) * d], query, gamma);
    }
    acc + machine.b
}

/// Majority vote over all pairwise machines; ties to the lowest class index.
pub fn svc_predict(model: &SvcModel, x: &[f64], d: usize) -> Result<Vec<usize>> {
    if d != model.d {
        return Err(Error::validation(format!(
            "query dimension {d} does not match model dimension {}",
            model.d
        )));
    }
    if x.len() % d != 0 {
        return Err(Error::validation("query matrix length not a multiple of d"));
    }
    let gamma = model.params.gamma;
    Ok((0..x.len() / d)
        .into_par_iter()
        .map(|r| {
            let q = &x[r * d..(r + 1) * d];
            let mut votes = vec![0u32; model.n_classes];
            for m in &model.pairs {
                let v = pair_decision(m, gamma, q);
                votes[if v > 0.0 { m.class_a } else { m.class_b }] += 1;
            }
            let mut best = 0usize;
            for (cl, &v) in votes.iter().enumerate().skip(1) {
                if v > votes[best] {
                    best = cl;
                }
            }
            best
        })
        .collect())
}
