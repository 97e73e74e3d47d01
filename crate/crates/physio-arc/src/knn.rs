//! Brute-force k-nearest-neighbours classifier on squared Euclidean
//! distance. Deterministic tie rules: equidistant neighbours are ordered by
//! lower training-row index, tied votes go to the lower class index.
//!
//! Batch prediction ranks by the expansion ‖x‖² − 2⟨x, q⟩, which differs from
//! the squared distance only by the per-query constant ‖q‖² and therefore
//! induces the same neighbour order; the inner products come from one matrix
//! product per query block.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Queries per Gram block; bounds the n × block score buffer.
const QUERY_BLOCK: usize = 128;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KnnModel {
    pub x: Vec<f64>,
    pub y: Vec<usize>,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub n_classes: usize,
}

pub fn knn_fit(x: &[f64], y: &[usize], d: usize, n_classes: usize, k: usize) -> Result<KnnModel> {
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
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(Error::validation(format!(
            "label {bad} out of range for {n_classes} classes"
        )));
    }
    if k == 0 || k > y.len() {
        return Err(Error::validation(format!(
            "k must satisfy 1 <= k <= n_train ({}), got {k}",
            y.len()
        )));
    }
    Ok(KnnModel { x: x.to_vec(), y: y.to_vec(), n: y.len(), d, k, n_classes })
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (u, v) in a.iter().zip(b) {
        let diff = u - v;
        acc += diff * diff;
    }
    acc
}

/// The k nearest training rows of one query, ordered by (distance, index).
pub fn neighbours(model: &KnnModel, query: &[f64]) -> Result<Vec<(f64, usize)>> {
    if query.len() != model.d {
        return Err(Error::validation(format!(
            "query dimension {} does not match model dimension {}",
            query.len(),
            model.d
        )));
    }
    let mut dist: Vec<(f64, u32)> = (0..model.n)
        .map(|i| (squared_distance(&model.x[i * model.d..(i + 1) * model.d], query), i as u32))
        .collect();
    let cmp = |a: &(f64, u32), b: &(f64, u32)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    // Selection, not a full sort: everything at or left of k-1 precedes the
    // rest under the composite order.
    dist.select_nth_unstable_by(model.k - 1, cmp);
    let mut top: Vec<(f64, usize)> = dist[..model.k].iter().map(|&(d, i)| (d, i as usize)).collect();
    top.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(top)
}

/// Majority vote over scores already ordered like squared distances.
fn vote_scored(model: &KnnModel, scores: &[f64]) -> usize {
    let mut ranked: Vec<(f64, u32)> =
        scores.iter().enumerate().map(|(i, &s)| (s, i as u32)).collect();
    let cmp = |a: &(f64, u32), b: &(f64, u32)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    ranked.select_nth_unstable_by(model.k - 1, cmp);
    let mut counts = vec![0u32; model.n_classes];
    for &(_, i) in &ranked[..model.k] {
        counts[model.y[i as usize]] += 1;
    }
    let mut best = 0usize;
    for (c, &v) in counts.iter().enumerate().skip(1) {
        if v > counts[best] {
            best = c;
        }
    }
    best
}

/// Predict labels for a row-major query matrix.
pub fn knn_predict(model: &KnnModel, x: &[f64], d: usize) -> Result<Vec<usize>> {
    if d != model.d {
        return Err(Error::validation(format!(
            "query dimension {d} does not match model dimension {}",
            model.d
        )));
    }
    if x.len() % d != 0 {
        return Err(Error::validation("query matrix length not a multiple of d"));
    }
    let nq = x.len() / d;
    let train = DMatrix::from_row_slice(model.n, d, &model.x);
    let train_sq: Vec<f64> = (0..model.n)
        .map(|i| model.x[i * d..(i + 1) * d].iter().map(|v| v * v).sum())
        .collect();
    let blocks: Vec<(usize, usize)> = (0..nq)
        .step_by(QUERY_BLOCK)
        .map(|s| (s, (s + QUERY_BLOCK).min(nq)))
        .collect();
    let predicted: Vec<Vec<usize>> = blocks
        .par_iter()
        .map(|&(start, end)| {
            // Row-major query rows read as columns of a (d × block) matrix.
            let queries = DMatrix::from_column_slice(d, end - start, &x[start * d..end * d]);
            let gram = &train * queries;
            (0..end - start)
                .map(|j| {
                    let scores: Vec<f64> = gram
                        .column(j)
                        .iter()
                        .zip(&train_sq)
                        .map(|(&g, &sq)| sq - 2.0 * g)
                        .collect();
                    vote_scored(model, &scores)
                })
                .collect()
        })
        .collect();
    Ok(predicted.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    #[test]
    fn k1_memorizes_duplicate_free_training_set() {
        let mut rng = stream(1, &[60]);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..50 {
            x.push(rng.gen_range(-5.0..5.0));
            x.push(rng.gen_range(-5.0..5.0));
            y.push(i % 3);
        }
        let model = knn_fit(&x, &y, 2, 3, 1).unwrap();
        let pred = knn_predict(&model, &x, 2).unwrap();
        assert_eq!(pred, y);
    }

    #[test]
    fn matches_sort_oracle() {
        let mut rng = stream(2, &[61]);
        let n = 200;
        let d = 5;
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            for _ in 0..d {
                x.push(rng.gen_range(-1.0..1.0));
            }
            y.push(rng.gen_range(0..4usize));
        }
        for k in [1usize, 7, 30] {
            let model = knn_fit(&x, &y, d, 4, k).unwrap();
            for q in 0..20 {
                let query: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                // Oracle: full sort by (distance, index), majority vote with
                // lowest-class ties.
                let mut all: Vec<(f64, usize)> = (0..n)
                    .map(|i| (squared_distance(&x[i * d..(i + 1) * d], &query), i))
                    .collect();
                all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let mut counts = vec![0u32; 4];
                for &(_, i) in &all[..k] {
                    counts[y[i]] += 1;
                }
                let expect = counts
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
                    .unwrap()
                    .0;
                let got = knn_predict(&model, &query, d).unwrap()[0];
                assert_eq!(got, expect, "k={k} query={q}");
            }
        }
    }

    #[test]
    fn distance_tie_prefers_lower_index() {
        // Two training points equidistant from the query; index 0 has class 1.
        let x = vec![1.0, 0.0, -1.0, 0.0];
        let y = vec![1, 0];
        let model = knn_fit(&x, &y, 2, 2, 1).unwrap();
        let pred = knn_predict(&model, &[0.0, 0.0], 2).unwrap();
        assert_eq!(pred, vec![1]);
    }

    #[test]
    fn vote_tie_prefers_lower_class() {
        let x = vec![0.0, 1.0];
        let y = vec![2, 1];
        let model = knn_fit(&x, &y, 1, 3, 2).unwrap();
        // Both neighbours always included: one vote each, class 1 wins.
        let pred = knn_predict(&model, &[5.0], 1).unwrap();
        assert_eq!(pred, vec![1]);
    }

    #[test]
    fn k_equals_n_is_global_majority() {
        let x = vec![0.0, 1.0, 2.0, 3.0, 100.0];
        let y = vec![1, 1, 1, 0, 0];
        let model = knn_fit(&x, &y, 1, 2, 5).unwrap();
        let pred = knn_predict(&model, &[1000.0], 1).unwrap();
        assert_eq!(pred, vec![1]);
    }

    #[test]
    fn invalid_k_rejected() {
        let x = vec![0.0, 1.0];
        let y = vec![0, 1];
        assert!(knn_fit(&x, &y, 1, 2, 0).is_err());
        assert!(knn_fit(&x, &y, 1, 2, 3).is_err());
    }
}
