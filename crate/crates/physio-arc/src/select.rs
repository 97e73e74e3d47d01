//! Feature ranking and selection: an extremely-randomized-trees ensemble
//! scores every feature by mean normalized Gini importance, and a mask keeps
//! the highest-scoring fraction of columns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::trees::{fit_forest, gini_importance, ForestMode, ForestParams};

pub const DEFAULT_RANKING_TREES: usize = 250;
pub const DEFAULT_FEATURE_FRACTION: f64 = 0.75;

/// Importance scores for every feature, sorted view available via `order`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureRanking {
    pub importance: Vec<f64>,
    pub names: Vec<String>,
    pub n_trees: usize,
    pub seed: u64,
}

impl FeatureRanking {
    /// Feature indices from most to least important; ties broken by lower
    /// feature index.
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.importance.len()).collect();
        idx.sort_by(|&a, &b| {
            self.importance[b]
                .total_cmp(&self.importance[a])
                .then(a.cmp(&b))
        });
        idx
    }
}

/// Column subset produced by a ranking; indices are kept ascending so masked
/// matrices preserve the original column order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMask {
    pub indices: Vec<usize>,
    pub d_original: usize,
}

impl FeatureMask {
    pub fn identity(d: usize) -> Self {
        FeatureMask { indices: (0..d).collect(), d_original: d }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Rank features by fitting an ExtraTrees ensemble on the given rows of a
/// (typically scaled) feature matrix. `max_features_fraction` follows the
/// usual √d heuristic when `None`.
pub fn rank_features(
    matrix: &FeatureMatrix,
    rows: &[usize],
    n_trees: usize,
    max_features_fraction: Option<f64>,
    seed: u64,
) -> Result<FeatureRanking> {
    if rows.is_empty() {
        return Err(Error::validation("cannot rank features on zero rows"));
    }
    let d = matrix.d;
    let fraction = match max_features_fraction {
        Some(f) => f,
        None => ((d as f64).sqrt() / d as f64).min(1.0),
    };
    let mut x = Vec::with_capacity(rows.len() * d);
    let mut y = Vec::with_capacity(rows.len());
    for &r in rows {
        if r >= matrix.n() {
            return Err(Error::validation(format!("row {r} out of range")));
        }
        x.extend_from_slice(matrix.row(r));
        y.push(matrix.labels[r].index());
    }
    let params = ForestParams::new(ForestMode::ExtraTrees, n_trees, fraction, seed);
    let forest = fit_forest(&x, &y, d, crate::data::ExerciseClass::COUNT, &params)?;
    let importance = gini_importance(&forest)?;
    Ok(FeatureRanking { importance, names: matrix.names.clone(), n_trees, seed })
}

/// Keep the top `max(1, ⌊fraction·d⌋)` features of a ranking.
pub fn select_fraction(ranking: &FeatureRanking, fraction: f64) -> Result<FeatureMask> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::validation(format!(
            "feature fraction must be in (0, 1], got {fraction}"
        )));
    }
    let d = ranking.importance.len();
    let keep = ((fraction * d as f64).floor() as usize).clamp(1, d);
    let mut indices: Vec<usize> = ranking.order().into_iter().take(keep).collect();
    indices.sort_unstable();
    Ok(FeatureMask { indices, d_original: d })
}

/// Project a feature matrix onto the masked columns.
pub fn apply_mask(matrix: &FeatureMatrix, mask: &FeatureMask) -> Result<FeatureMatrix> {
    if mask.d_original != matrix.d {
        return Err(Error::validation(format!(
            "mask was built for {} features, matrix has {}",
            mask.d_original, matrix.d
        )));
    }
    if mask.is_empty() {
        return Err(Error::validation("feature mask is empty"));
    }
    if let Some(&bad) = mask.indices.iter().find(|&&i| i >= matrix.d) {
        return Err(Error::validation(format!("mask index {bad} out of range")));
    }
    let n = matrix.n();
    let dk = mask.len();
    let mut values = Vec::with_capacity(n * dk);
    for r in 0..n {
        let row = matrix.row(r);
        for &c in &mask.indices {
            values.push(row[c]);
        }
    }
    Ok(FeatureMatrix {
        values,
        d: dk,
        names: mask.indices.iter().map(|&i| matrix.names[i].clone()).collect(),
        labels: matrix.labels.clone(),
        meta: matrix.meta.clone(),
        recordings: matrix.recordings.clone(),
        spec: matrix.spec.clone(),
        scaling: matrix.scaling.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{ExerciseClass, Side};
    use crate::features::{extract_features, N_FEATURES};
    use crate::segment::{segment, SegmentationSpec};
    use crate::synth::{generate_dataset, SynthConfig};

    fn small_matrix() -> FeatureMatrix {
        let cfg = SynthConfig {
            n_subjects: 2,
            reps_per_set: 3,
            rest_padding_seconds: 1.0,
            ..SynthConfig::default()
        };
        let (recs, _) = generate_dataset(&cfg).unwrap();
        let spec = SegmentationSpec::new(2.0, 0.5, cfg.fs_hz);
        let tensor = segment(&recs, &spec).unwrap();
        extract_features(&tensor).unwrap()
    }

    #[test]
    fn ranking_sums_to_one_and_is_nonnegative() {
        let m = small_matrix();
        let rows: Vec<usize> = (0..m.n()).collect();
        let ranking = rank_features(&m, &rows, 50, None, 99).unwrap();
        let sum: f64 = ranking.importance.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9, "sum = {sum}");
        assert!(ranking.importance.iter().all(|&v| v >= 0.0));
        assert_eq!(ranking.importance.len(), N_FEATURES);
    }

    #[test]
    fn constant_column_gets_zero_importance() {
        let m = small_matrix();
        // Restrict to right-side rows so the `side` column is constant.
        let rows: Vec<usize> = (0..m.n())
            .filter(|&r| {
                let rec = &m.recordings[m.meta[r].recording_index];
                rec.side == Side::Right
            })
            .collect();
        assert!(!rows.is_empty());
        let ranking = rank_features(&m, &rows, 30, None, 5).unwrap();
        let side_idx = m.names.iter().position(|n| n == "side").unwrap();
        assert_eq!(ranking.importance[side_idx], 0.0);
    }

    #[test]
    fn fraction_counts() {
        let ranking = FeatureRanking {
            importance: vec![0.0; N_FEATURES],
            names: crate::features::feature_names(),
            n_trees: 1,
            seed: 0,
        };
        assert_eq!(select_fraction(&ranking, 0.75).unwrap().len(), 99);
        assert_eq!(select_fraction(&ranking, 1.0).unwrap().len(), 133);
        assert_eq!(select_fraction(&ranking, 0.005).unwrap().len(), 1);
        assert!(select_fraction(&ranking, 0.0).is_err());
        assert!(select_fraction(&ranking, 1.5).is_err());
    }

    #[test]
    fn tie_break_prefers_lower_index() {
        let ranking = FeatureRanking {
            importance: vec![0.25, 0.25, 0.25, 0.25],
            names: vec!["a".into(), "b".into(), "c".into(), "d".into()],
            n_trees: 1,
            seed: 0,
        };
        let mask = select_fraction(&ranking, 0.5).unwrap();
        assert_eq!(mask.indices, vec![0, 1]);
    }

    #[test]
    fn mask_projects_columns_in_order() {
        let m = small_matrix();
        let mask = FeatureMask { indices: vec![0, 4, 132], d_original: m.d };
        let projected = apply_mask(&m, &mask).unwrap();
        assert_eq!(projected.d, 3);
        assert_eq!(projected.names, vec!["ax.mean", "ax.min", "side"]);
        for r in 0..m.n() {
            assert_eq!(projected.row(r)[0], m.row(r)[0]);
            assert_eq!(projected.row(r)[1], m.row(r)[4]);
            assert_eq!(projected.row(r)[2], m.row(r)[132]);
        }
        assert_eq!(projected.labels, m.labels);
    }

    #[test]
    fn mask_dimension_mismatch_rejected() {
        let m = small_matrix();
        let mask = FeatureMask { indices: vec![0], d_original: 7 };
        assert!(apply_mask(&m, &mask).is_err());
        let _ = ExerciseClass::COUNT;
    }
}
