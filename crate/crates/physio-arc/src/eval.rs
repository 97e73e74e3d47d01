//! Cross-validation harness: temporal and subject fold construction with
//! machine-checked disjointness, leakage-free per-fold scaling and feature
//! selection, confusion matrices, a 2-component LDA embedding, and
//! hyperparameter sweeps.
//!
//! Temporal folds are built block-first: each recording's annotated interval
//! is cut into k near-equal contiguous blocks, block j feeds fold j, and any
//! window straddling a block boundary is dropped so no two folds ever share
//! a sample range. Subject folds shuffle the sorted subject list with a
//! seeded stream and deal subjects round-robin. Validation rows are thinned
//! to a configurable overlap (default 0%) so validation counts stay
//! comparable when the training overlap is swept.

use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::data::ExerciseClass;
use crate::error::{Error, Result};
use crate::features::{featurize_recordings, fit_scaling, scale_row_into, FeatureMatrix, Scaling};
use crate::knn::{knn_fit, knn_predict};
use crate::nn::{crnn_predict, crnn_train, CrnnConfig};
use crate::rng::{derive_key, stream, tag};
use crate::segment::{RecordingInfo, SegmentationSpec, WindowMeta, WindowTensor, CHANNELS};
use crate::select::{rank_features, select_fraction, FeatureMask, FeatureRanking};
use crate::svm::{svc_fit, svc_predict, SvcParams};
use crate::trees::{fit_forest, predict_forest, ForestMode, ForestParams};

pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldKind {
    Temporal,
    Subject,
}

impl FoldKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FoldKind::Temporal => "temporal",
            FoldKind::Subject => "subject",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingBlocks {
    pub recording_index: usize,
    /// k+1 absolute sample boundaries, or empty when assigned wholesale.
    pub boundaries: Vec<usize>,
    /// Fold receiving the whole recording when it is too short to split.
    pub wholesale_fold: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldProvenance {
    Temporal { blocks: Vec<RecordingBlocks> },
    Subject { fold_subjects: Vec<Vec<String>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub kind: FoldKind,
    pub k: usize,
    /// Window indices per fold, each ascending.
    pub folds: Vec<Vec<usize>>,
    pub provenance: FoldProvenance,
    pub warnings: Vec<String>,
    pub window_len: usize,
    pub n_windows: usize,
}

/// The window geometry shared by `WindowTensor` and `FeatureMatrix`.
#[derive(Clone, Copy)]
pub struct WindowGeometry<'a> {
    pub meta: &'a [WindowMeta],
    pub recordings: &'a [RecordingInfo],
    pub window_len: usize,
}

impl<'a> WindowGeometry<'a> {
    pub fn of_tensor(wt: &'a WindowTensor) -> Self {
        WindowGeometry { meta: &wt.meta, recordings: &wt.recordings, window_len: wt.len }
    }

    pub fn of_features(fm: &'a FeatureMatrix) -> Result<Self> {
        let spec = fm.spec.as_ref().ok_or_else(|| {
            Error::validation("feature matrix carries no segmentation spec; cannot plan folds")
        })?;
        Ok(WindowGeometry {
            meta: &fm.meta,
            recordings: &fm.recordings,
            window_len: spec.window_len(),
        })
    }
}

fn validate_k(k: usize, n_windows: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::validation(format!("fold count must be >= 2, got {k}")));
    }
    if n_windows == 0 {
        return Err(Error::validation("cannot plan folds over zero windows"));
    }
    Ok(())
}

/// Block-first temporal folds: per recording, cut the annotated interval
/// into k near-equal blocks, assign windows fully inside block j to fold j,
/// and drop boundary straddlers. Recordings too short for k window-sized
/// blocks go wholesale to a single fold (round-robin) with a warning.
pub fn plan_temporal_folds_of(geom: WindowGeometry<'_>, k: usize) -> Result<FoldPlan> {
    validate_k(k, geom.meta.len())?;
    let l = geom.window_len;
    let mut folds = vec![Vec::new(); k];
    let mut blocks = Vec::with_capacity(geom.recordings.len());
    let mut warnings = Vec::new();
    let mut wholesale_count = 0usize;
    for (rec_idx, info) in geom.recordings.iter().enumerate() {
        let a = info.interval.start;
        let m = info.interval.len();
        let windows = info.first_window..info.first_window + info.n_windows;
        if m < k * l {
            let fold = wholesale_count % k;
            wholesale_count += 1;
            warnings.push(format!(
                "recording {}: interval of {m} samples cannot host {k} blocks of {l}; assigned wholesale to fold {fold}",
                info.id
            ));
            folds[fold].extend(windows);
            blocks.push(RecordingBlocks {
                recording_index: rec_idx,
                boundaries: vec![],
                wholesale_fold: Some(fold),
            });
            continue;
        }
        let boundaries: Vec<usize> = (0..=k)
            .map(|j| a + ((j * m) as f64 / k as f64).round() as usize)
            .collect();
        for i in windows {
            let start = geom.meta[i].start_sample;
            for j in 0..k {
                if boundaries[j] <= start && start + l <= boundaries[j + 1] {
                    folds[j].push(i);
                    break;
                }
            }
        }
        blocks.push(RecordingBlocks {
            recording_index: rec_idx,
            boundaries,
            wholesale_fold: None,
        });
    }
    Ok(FoldPlan {
        kind: FoldKind::Temporal,
        k,
        folds,
        provenance: FoldProvenance::Temporal { blocks },
        warnings,
        window_len: l,
        n_windows: geom.meta.len(),
    })
}

/// Subject folds: sorted subjects, seeded shuffle, round-robin deal.
pub fn plan_subject_folds_of(geom: WindowGeometry<'_>, k: usize, seed: u64) -> Result<FoldPlan> {
    validate_k(k, geom.meta.len())?;
    let mut subjects: Vec<String> = geom
        .recordings
        .iter()
        .map(|r| r.subject_id.clone())
        .collect();
    subjects.sort();
    subjects.dedup();
    if subjects.len() < k {
        return Err(Error::validation(format!(
            "{} subjects cannot fill {k} folds",
            subjects.len()
        )));
    }
    use rand::seq::SliceRandom;
    subjects.shuffle(&mut stream(seed, &[tag::SUBJECT_SHUFFLE]));
    let mut fold_subjects: Vec<Vec<String>> = vec![Vec::new(); k];
    for (i, s) in subjects.into_iter().enumerate() {
        fold_subjects[i % k].push(s);
    }
    for group in fold_subjects.iter_mut() {
        group.sort();
    }
    let fold_of_subject = |subject: &str| -> usize {
        fold_subjects
            .iter()
            .position(|g| g.iter().any(|s| s == subject))
            .expect("every subject was dealt to a fold")
    };
    let mut folds = vec![Vec::new(); k];
    for (i, m) in geom.meta.iter().enumerate() {
        let subject = &geom.recordings[m.recording_index].subject_id;
        folds[fold_of_subject(subject)].push(i);
    }
    Ok(FoldPlan {
        kind: FoldKind::Subject,
        k,
        folds,
        provenance: FoldProvenance::Subject { fold_subjects },
        warnings: Vec::new(),
        window_len: geom.window_len,
        n_windows: geom.meta.len(),
    })
}

pub fn plan_temporal_folds(wt: &WindowTensor, k: usize) -> Result<FoldPlan> {
    plan_temporal_folds_of(WindowGeometry::of_tensor(wt), k)
}

pub fn plan_subject_folds(wt: &WindowTensor, k: usize, seed: u64) -> Result<FoldPlan> {
    plan_subject_folds_of(WindowGeometry::of_tensor(wt), k, seed)
}

/// Machine-check the plan invariants: indices in range, folds pairwise
/// disjoint, subject folds covering every window, temporal folds sharing no
/// sample range within any recording.
pub fn check_fold_plan(plan: &FoldPlan, geom: WindowGeometry<'_>) -> Result<()> {
    let n = geom.meta.len();
    if plan.n_windows != n || plan.window_len != geom.window_len {
        return Err(Error::validation(
            "fold plan was built for a different segmentation".to_string(),
        ));
    }
    let mut owner = vec![usize::MAX; n];
    for (f, fold) in plan.folds.iter().enumerate() {
        for &i in fold {
            if i >= n {
                return Err(Error::validation(format!("fold {f} references window {i} >= {n}")));
            }
            if owner[i] != usize::MAX {
                return Err(Error::validation(format!(
                    "window {i} appears in folds {} and {f}",
                    owner[i]
                )));
            }
            owner[i] = f;
        }
    }
    if plan.kind == FoldKind::Subject && owner.iter().any(|&f| f == usize::MAX) {
        return Err(Error::validation("subject plan does not cover every window"));
    }
    if plan.kind == FoldKind::Temporal {
        let l = geom.window_len;
        for info in geom.recordings {
            let range = info.first_window..info.first_window + info.n_windows;
            let assigned: Vec<(usize, usize)> = range
                .filter(|&i| owner[i] != usize::MAX)
                .map(|i| (geom.meta[i].start_sample, owner[i]))
                .collect();
            for (w, &(start, fold)) in assigned.iter().enumerate() {
                for &(other_start, other_fold) in &assigned[w + 1..] {
                    if other_start >= start + l {
                        break;
                    }
                    if other_fold != fold {
                        return Err(Error::validation(format!(
                            "recording {}: windows at {start} (fold {fold}) and {other_start} (fold {other_fold}) share samples",
                            info.id
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Thin a fold's windows to at most `overlap` fractional overlap (greedy
/// left-to-right keep).
pub fn thin_windows(
    fold: &[usize],
    meta: &[WindowMeta],
    window_len: usize,
    overlap: f64,
) -> Vec<usize> {
    let stride = ((window_len as f64) * (1.0 - overlap)).round().max(1.0) as usize;
    let mut kept = Vec::new();
    let mut last: Option<(usize, usize)> = None;
    for &i in fold {
        let m = &meta[i];
        let keep = match last {
            Some((rec, start)) => rec != m.recording_index || m.start_sample >= start + stride,
            None => true,
        };
        if keep {
            kept.push(i);
            last = Some((m.recording_index, m.start_sample));
        }
    }
    kept
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierKind {
    Knn { k: usize },
    RandomForest { n_estimators: usize, max_features_fraction: f64 },
    Svc { c: f64, gamma: f64 },
    Crnn { config: CrnnConfig },
}

impl ClassifierKind {
    pub fn label(&self) -> String {
        match self {
            ClassifierKind::Knn { k } => format!("knn(k={k})"),
            ClassifierKind::RandomForest { n_estimators, max_features_fraction } => {
                format!("random_forest(trees={n_estimators}, max_features={max_features_fraction})")
            }
            ClassifierKind::Svc { c, gamma } => format!("svc(C={c}, gamma={gamma})"),
            ClassifierKind::Crnn { .. } => "crnn".to_string(),
        }
    }

    pub fn uses_features(&self) -> bool {
        !matches!(self, ClassifierKind::Crnn { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub classifier: ClassifierKind,
    /// Fraction of ranked features kept for feature classifiers.
    pub feature_fraction: f64,
    pub ranking_trees: usize,
    /// Candidate fraction for the ranking forest; None uses √d/d.
    pub ranking_max_features: Option<f64>,
    /// Fit ranking once on all rows instead of per fold (leaky; off by
    /// default, kept for comparison runs).
    pub global_selection: bool,
    /// Overlap of validation windows (training windows keep the
    /// segmentation's own overlap).
    pub validation_overlap: f64,
    pub seed: u64,
}

impl Default for PipelineSpec {
    fn default() -> Self {
        PipelineSpec {
            classifier: ClassifierKind::RandomForest {
                n_estimators: 150,
                max_features_fraction: 0.10,
            },
            feature_fraction: crate::select::DEFAULT_FEATURE_FRACTION,
            ranking_trees: crate::select::DEFAULT_RANKING_TREES,
            ranking_max_features: None,
            global_selection: false,
            validation_overlap: 0.0,
            seed: 0x5EED,
        }
    }
}

impl PipelineSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.feature_fraction > 0.0 && self.feature_fraction <= 1.0) {
            return Err(Error::validation(format!(
                "feature_fraction must be in (0, 1], got {}",
                self.feature_fraction
            )));
        }
        if self.ranking_trees == 0 {
            return Err(Error::validation("ranking_trees must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.validation_overlap) {
            return Err(Error::validation(format!(
                "validation_overlap must be in [0, 1), got {}",
                self.validation_overlap
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub fold: usize,
    pub train_rows: usize,
    pub validation_rows: usize,
    pub train_accuracy: f64,
    pub validation_accuracy: f64,
    pub train_seconds: f64,
    pub score_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classifier: String,
    pub protocol: String,
    pub n_classes: usize,
    pub folds: Vec<FoldOutcome>,
    pub train_accuracy_mean: f64,
    pub train_accuracy_std: f64,
    pub validation_accuracy_mean: f64,
    pub validation_accuracy_std: f64,
    pub train_seconds_total: f64,
    pub score_seconds_total: f64,
    /// Row-major n_classes × n_classes counts over validation rows; rows are
    /// the true class.
    pub confusion: Vec<u64>,
    pub warnings: Vec<String>,
    pub threads: usize,
}

impl EvalReport {
    pub fn confusion_at(&self, truth: usize, predicted: usize) -> u64 {
        self.confusion[truth * self.n_classes + predicted]
    }

    /// Row-normalized confusion (rows with no samples stay zero).
    pub fn confusion_normalized(&self) -> Vec<f64> {
        let nc = self.n_classes;
        let mut out = vec![0.0; nc * nc];
        for r in 0..nc {
            let total: u64 = self.confusion[r * nc..(r + 1) * nc].iter().sum();
            if total > 0 {
                for c in 0..nc {
                    out[r * nc + c] = self.confusion[r * nc + c] as f64 / total as f64;
                }
            }
        }
        out
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn accuracy(truth: &[usize], predicted: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let correct = truth.iter().zip(predicted).filter(|(t, p)| t == p).count();
    correct as f64 / truth.len() as f64
}

/// Confusion counts, rows = true class, columns = predicted.
pub fn confusion_matrix(truth: &[usize], predicted: &[usize], n_classes: usize) -> Result<Vec<u64>> {
    if truth.len() != predicted.len() {
        return Err(Error::validation(format!(
            "confusion matrix needs equal lengths, got {} and {}",
            truth.len(),
            predicted.len()
        )));
    }
    let mut counts = vec![0u64; n_classes * n_classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        if t >= n_classes || p >= n_classes {
            return Err(Error::validation(format!(
                "label pair ({t}, {p}) out of range for {n_classes} classes"
            )));
        }
        counts[t * n_classes + p] += 1;
    }
    Ok(counts)
}

/// Gather rows, standardize with the given scaling, and project onto the
/// mask (identity when None).
fn gather_rows(
    fm: &FeatureMatrix,
    rows: &[usize],
    scaling: &Scaling,
    mask: Option<&FeatureMask>,
) -> (Vec<f64>, Vec<usize>) {
    let d = fm.d;
    let mut scaled = vec![0.0f64; d];
    let kept: Vec<usize> = match mask {
        Some(m) => m.indices.clone(),
        None => (0..d).collect(),
    };
    let mut x = Vec::with_capacity(rows.len() * kept.len());
    let mut y = Vec::with_capacity(rows.len());
    for &r in rows {
        scale_row_into(fm.row(r), scaling, &mut scaled);
        for &c in &kept {
            x.push(scaled[c]);
        }
        y.push(fm.labels[r].index());
    }
    (x, y)
}

fn missing_classes(y: &[usize], n_classes: usize) -> Vec<usize> {
    let mut seen = vec![false; n_classes];
    for &c in y {
        seen[c] = true;
    }
    (0..n_classes).filter(|&c| !seen[c]).collect()
}

trait FittedClassifier {
    fn predict(&self, x: &[f64], d: usize) -> Result<Vec<usize>>;
}

struct ForestWrap(crate::trees::ForestModel);
impl FittedClassifier for ForestWrap {
    fn predict(&self, x: &[f64], d: usize) -> Result<Vec<usize>> {
        Ok(predict_forest(&self.0, x, d)?.0)
    }
}
struct KnnWrap(crate::knn::KnnModel);
impl FittedClassifier for KnnWrap {
    fn predict(&self, x: &[f64], d: usize) -> Result<Vec<usize>> {
        knn_predict(&self.0, x, d)
    }
}
struct SvcWrap(crate::svm::SvcModel);
impl FittedClassifier for SvcWrap {
    fn predict(&self, x: &[f64], d: usize) -> Result<Vec<usize>> {
        svc_predict(&self.0, x, d)
    }
}

fn fit_feature_classifier(
    kind: &ClassifierKind,
    x: &[f64],
    y: &[usize],
    d: usize,
    n_classes: usize,
    fold_seed: u64,
    warnings: &mut Vec<String>,
) -> Result<Box<dyn FittedClassifier>> {
    match kind {
        ClassifierKind::Knn { k } => Ok(Box::new(KnnWrap(knn_fit(x, y, d, n_classes, *k)?))),
        ClassifierKind::RandomForest { n_estimators, max_features_fraction } => {
            let params = ForestParams::new(
                ForestMode::RandomForest,
                *n_estimators,
                *max_features_fraction,
                fold_seed,
            );
            Ok(Box::new(ForestWrap(fit_forest(x, y, d, n_classes, &params)?)))
        }
        ClassifierKind::Svc { c, gamma } => {
            let params = SvcParams { c: *c, gamma: *gamma, ..SvcParams::default() };
            let model = svc_fit(x, y, d, n_classes, &params)?;
            warnings.extend(model.warnings.iter().cloned());
            Ok(Box::new(SvcWrap(model)))
        }
        ClassifierKind::Crnn { .. } => Err(Error::validation(
            "the CRNN trains on raw windows; use cross_validate_windows",
        )),
    }
}

/// Cross-validate a feature-space classifier. Scaling and feature ranking
/// are fitted on each fold's training rows only (unless `global_selection`).
pub fn cross_validate(
    features: &FeatureMatrix,
    plan: &FoldPlan,
    spec: &PipelineSpec,
) -> Result<EvalReport> {
    spec.validate()?;
    if !spec.classifier.uses_features() {
        return Err(Error::validation(
            "the CRNN trains on raw windows; use cross_validate_windows",
        ));
    }
    let geom = WindowGeometry::of_features(features)?;
    check_fold_plan(plan, geom)?;
    let n_classes = ExerciseClass::COUNT;
    let mut warnings = plan.warnings.clone();
    let global_ranking: Option<FeatureRanking> = if spec.global_selection {
        let all_rows: Vec<usize> = (0..features.n()).collect();
        Some(rank_features(
            features,
            &all_rows,
            spec.ranking_trees,
            spec.ranking_max_features,
            derive_key(spec.seed, &[tag::RANK]),
        )?)
    } else {
        None
    };

    let mut outcomes = Vec::new();
    let mut truth_all = Vec::new();
    let mut pred_all = Vec::new();
    for fold in 0..plan.k {
        let val_rows = thin_windows(&plan.folds[fold], &features.meta, plan.window_len, spec.validation_overlap);
        let mut train_rows = Vec::new();
        for (f, other) in plan.folds.iter().enumerate() {
            if f != fold {
                train_rows.extend_from_slice(other);
            }
        }
        train_rows.sort_unstable();
        if train_rows.is_empty() || val_rows.is_empty() {
            warnings.push(format!(
                "fold {fold} skipped: {} training rows, {} validation rows",
                train_rows.len(),
                val_rows.len()
            ));
            continue;
        }

        let scaling = fit_scaling(features, &train_rows, &format!("fold {fold} train"))?;
        let ranking = match &global_ranking {
            Some(r) => r.clone(),
            None => rank_features(
                features,
                &train_rows,
                spec.ranking_trees,
                spec.ranking_max_features,
                derive_key(spec.seed, &[tag::RANK, fold as u64]),
            )?,
        };
        let mask = select_fraction(&ranking, spec.feature_fraction)?;
        let (x_train, y_train) = gather_rows(features, &train_rows, &scaling, Some(&mask));
        let (x_val, y_val) = gather_rows(features, &val_rows, &scaling, Some(&mask));
        for c in missing_classes(&y_train, n_classes) {
            warnings.push(format!(
                "fold {fold}: class {} absent from training rows",
                ExerciseClass::from_index(c).unwrap().as_str()
            ));
        }
        for c in missing_classes(&y_val, n_classes) {
            warnings.push(format!(
                "fold {fold}: class {} absent from validation rows",
                ExerciseClass::from_index(c).unwrap().as_str()
            ));
        }
        let d = mask.len();
        let fold_seed = derive_key(spec.seed, &[tag::CLASSIFIER, fold as u64]);
        let t0 = Instant::now();
        let model =
            fit_feature_classifier(&spec.classifier, &x_train, &y_train, d, n_classes, fold_seed, &mut warnings)?;
        let train_seconds = t0.elapsed().as_secs_f64();
        let train_pred = model.predict(&x_train, d)?;
        let t1 = Instant::now();
        let val_pred = model.predict(&x_val, d)?;
        let score_seconds = t1.elapsed().as_secs_f64();
        outcomes.push(FoldOutcome {
            fold,
            train_rows: train_rows.len(),
            validation_rows: val_rows.len(),
            train_accuracy: accuracy(&y_train, &train_pred),
            validation_accuracy: accuracy(&y_val, &val_pred),
            train_seconds,
            score_seconds,
        });
        truth_all.extend_from_slice(&y_val);
        pred_all.extend_from_slice(&val_pred);
    }
    if outcomes.is_empty() {
        return Err(Error::validation("every fold was skipped; nothing to evaluate"));
    }
    assemble_report(
        spec.classifier.label(),
        plan.kind.as_str().to_string(),
        n_classes,
        outcomes,
        &truth_all,
        &pred_all,
        warnings,
    )
}

/// Cross-validate the CRNN on raw windows (no features, no scaling).
pub fn cross_validate_windows(
    tensor: &WindowTensor,
    plan: &FoldPlan,
    spec: &PipelineSpec,
) -> Result<EvalReport> {
    spec.validate()?;
    let config = match &spec.classifier {
        ClassifierKind::Crnn { config } => config,
        _ => {
            return Err(Error::validation(
                "cross_validate_windows is only for the CRNN; use cross_validate",
            ))
        }
    };
    let geom = WindowGeometry::of_tensor(tensor);
    check_fold_plan(plan, geom)?;
    let n_classes = config.n_classes;
    let mut warnings = plan.warnings.clone();
    let mut outcomes = Vec::new();
    let mut truth_all = Vec::new();
    let mut pred_all = Vec::new();
    for fold in 0..plan.k {
        let val_rows =
            thin_windows(&plan.folds[fold], &tensor.meta, plan.window_len, spec.validation_overlap);
        let mut train_rows = Vec::new();
        for (f, other) in plan.folds.iter().enumerate() {
            if f != fold {
                train_rows.extend_from_slice(other);
            }
        }
        train_rows.sort_unstable();
        if train_rows.is_empty() || val_rows.is_empty() {
            warnings.push(format!(
                "fold {fold} skipped: {} training rows, {} validation rows",
                train_rows.len(),
                val_rows.len()
            ));
            continue;
        }
        let sub_train = subset_tensor(tensor, &train_rows);
        let sub_val = subset_tensor(tensor, &val_rows);
        for c in missing_classes(&sub_train.labels.iter().map(|l| l.index()).collect::<Vec<_>>(), n_classes) {
            warnings.push(format!("fold {fold}: class index {c} absent from training rows"));
        }
        let fold_cfg = CrnnConfig {
            seed: derive_key(spec.seed, &[tag::CLASSIFIER, fold as u64]),
            ..config.clone()
        };
        let t0 = Instant::now();
        let model = crnn_train(&sub_train, &fold_cfg)?;
        let train_seconds = t0.elapsed().as_secs_f64();
        let (train_pred, _) = crnn_predict(&model, &sub_train)?;
        let t1 = Instant::now();
        let (val_pred, _) = crnn_predict(&model, &sub_val)?;
        let score_seconds = t1.elapsed().as_secs_f64();
        let y_train: Vec<usize> = sub_train.labels.iter().map(|l| l.index()).collect();
        let y_val: Vec<usize> = sub_val.labels.iter().map(|l| l.index()).collect();
        outcomes.push(FoldOutcome {
            fold,
            train_rows: train_rows.len(),
            validation_rows: val_rows.len(),
            train_accuracy: accuracy(&y_train, &train_pred),
            validation_accuracy: accuracy(&y_val, &val_pred),
            train_seconds,
            score_seconds,
        });
        truth_all.extend_from_slice(&y_val);
        pred_all.extend_from_slice(&val_pred);
    }
    if outcomes.is_empty() {
        return Err(Error::validation("every fold was skipped; nothing to evaluate"));
    }
    assemble_report(
        spec.classifier.label(),
        plan.kind.as_str().to_string(),
        n_classes,
        outcomes,
        &truth_all,
        &pred_all,
        warnings,
    )
}

fn subset_tensor(tensor: &WindowTensor, rows: &[usize]) -> WindowTensor {
    let stride = tensor.len * CHANNELS;
    let mut data = Vec::with_capacity(rows.len() * stride);
    let mut labels = Vec::with_capacity(rows.len());
    let mut meta = Vec::with_capacity(rows.len());
    for &i in rows {
        data.extend_from_slice(tensor.window(i));
        labels.push(tensor.labels[i]);
        meta.push(tensor.meta[i].clone());
    }
    WindowTensor {
        data,
        n: rows.len(),
        len: tensor.len,
        labels,
        meta,
        recordings: tensor.recordings.clone(),
        spec: tensor.spec.clone(),
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble_report(
    classifier: String,
    protocol: String,
    n_classes: usize,
    outcomes: Vec<FoldOutcome>,
    truth: &[usize],
    predicted: &[usize],
    warnings: Vec<String>,
) -> Result<EvalReport> {
    let train_accs: Vec<f64> = outcomes.iter().map(|o| o.train_accuracy).collect();
    let val_accs: Vec<f64> = outcomes.iter().map(|o| o.validation_accuracy).collect();
    let (train_accuracy_mean, train_accuracy_std) = mean_std(&train_accs);
    let (validation_accuracy_mean, validation_accuracy_std) = mean_std(&val_accs);
    let confusion = confusion_matrix(truth, predicted, n_classes)?;
    Ok(EvalReport {
        classifier,
        protocol,
        n_classes,
        train_seconds_total: outcomes.iter().map(|o| o.train_seconds).sum(),
        score_seconds_total: outcomes.iter().map(|o| o.score_seconds).sum(),
        folds: outcomes,
        train_accuracy_mean,
        train_accuracy_std,
        validation_accuracy_mean,
        validation_accuracy_std,
        confusion,
        warnings,
        threads: rayon::current_num_threads(),
    })
}

/// 2-component (by default) linear discriminant embedding: solve
/// S_b v = λ (S_w + εI) v with ε = 1e−6·tr(S_w)/d via Cholesky whitening and
/// a symmetric eigendecomposition. Rows are projected after centering on the
/// global mean; eigenvectors are unit-norm with their largest-magnitude
/// coefficient positive.
pub fn lda_embed(fm: &FeatureMatrix, components: usize) -> Result<Vec<f64>> {
    let n = fm.n();
    let d = fm.d;
    if components == 0 || components > d {
        return Err(Error::validation(format!(
            "component count {components} out of range for {d} features"
        )));
    }
    let mut class_rows: Vec<Vec<usize>> = vec![Vec::new(); ExerciseClass::COUNT];
    for (i, l) in fm.labels.iter().enumerate() {
        class_rows[l.index()].push(i);
    }
    let present: Vec<&Vec<usize>> = class_rows.iter().filter(|r| !r.is_empty()).collect();
    if present.len() <= components {
        return Err(Error::validation(format!(
            "{} classes cannot support a {components}-component discriminant embedding",
            present.len()
        )));
    }

    let mut global_mean = vec![0.0f64; d];
    for i in 0..n {
        for (g, &v) in global_mean.iter_mut().zip(fm.row(i)) {
            *g += v;
        }
    }
    for g in global_mean.iter_mut() {
        *g /= n as f64;
    }

    let mut sw = DMatrix::<f64>::zeros(d, d);
    let mut sb = DMatrix::<f64>::zeros(d, d);
    let mut diff = vec![0.0f64; d];
    for rows in &present {
        let nc = rows.len() as f64;
        let mut mean = vec![0.0f64; d];
        for &i in rows.iter() {
            for (m, &v) in mean.iter_mut().zip(fm.row(i)) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= nc;
        }
        for &i in rows.iter() {
            let row = fm.row(i);
            for c in 0..d {
                diff[c] = row[c] - mean[c];
            }
            for a in 0..d {
                if diff[a] == 0.0 {
                    continue;
                }
                for b in a..d {
                    let v = diff[a] * diff[b];
                    sw[(a, b)] += v;
                }
            }
        }
        for c in 0..d {
            diff[c] = mean[c] - global_mean[c];
        }
        for a in 0..d {
            for b in a..d {
                sb[(a, b)] += nc * diff[a] * diff[b];
            }
        }
    }
    // Mirror the upper triangles.
    for a in 0..d {
        for b in 0..a {
            sw[(a, b)] = sw[(b, a)];
            sb[(a, b)] = sb[(b, a)];
        }
    }
    let epsilon = 1e-6 * sw.trace() / d as f64;
    for a in 0..d {
        sw[(a, a)] += epsilon;
    }
    let chol = sw
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Internal("within-class scatter is not positive definite".into()))?;
    let l = chol.l();
    let tmp = l
        .solve_lower_triangular(&sb)
        .ok_or_else(|| Error::Internal("triangular solve failed".into()))?;
    let c = l
        .solve_lower_triangular(&tmp.transpose())
        .ok_or_else(|| Error::Internal("triangular solve failed".into()))?;
    let sym = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| sym.eigenvalues[b].total_cmp(&sym.eigenvalues[a]));

    let lt = l.transpose();
    let mut directions = Vec::with_capacity(components);
    for &idx in order.iter().take(components) {
        let u = sym.eigenvectors.column(idx).into_owned();
        let mut v = lt
            .solve_upper_triangular(&u)
            .ok_or_else(|| Error::Internal("triangular solve failed".into()))?;
        let norm = v.norm();
        if norm > 0.0 {
            v /= norm;
        }
        let mut dominant = 0usize;
        for (i, val) in v.iter().enumerate() {
            if val.abs() > v[dominant].abs() {
                dominant = i;
            }
        }
        if v[dominant] < 0.0 {
            v = -v;
        }
        directions.push(v);
    }

    let mut out = vec![0.0f64; n * components];
    for i in 0..n {
        let row = fm.row(i);
        for (cidx, v) in directions.iter().enumerate() {
            let mut acc = 0.0;
            for c in 0..d {
                acc += (row[c] - global_mean[c]) * v[c];
            }
            out[i * components + cidx] = acc;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    WindowSeconds,
    Overlap,
    K,
    MaxFeaturesFraction,
    Gamma,
    FeatureFraction,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::WindowSeconds => "window_seconds",
            SweepAxis::Overlap => "overlap",
            SweepAxis::K => "k",
            SweepAxis::MaxFeaturesFraction => "max_features_fraction",
            SweepAxis::Gamma => "gamma",
            SweepAxis::FeatureFraction => "feature_fraction",
        }
    }

    pub fn is_segmentation(&self) -> bool {
        matches!(self, SweepAxis::WindowSeconds | SweepAxis::Overlap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub mean_validation_accuracy: f64,
    pub std_validation_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub axis: String,
    pub points: Vec<SweepPoint>,
    pub warnings: Vec<String>,
}

fn spec_with_value(spec: &PipelineSpec, axis: SweepAxis, value: f64) -> Result<PipelineSpec> {
    let mut out = spec.clone();
    match (axis, &mut out.classifier) {
        (SweepAxis::K, ClassifierKind::Knn { k }) => *k = value as usize,
        (SweepAxis::K, _) => {
            return Err(Error::validation("the k axis requires a k-NN classifier"))
        }
        (SweepAxis::MaxFeaturesFraction, ClassifierKind::RandomForest { max_features_fraction, .. }) => {
            *max_features_fraction = value;
        }
        (SweepAxis::MaxFeaturesFraction, _) => {
            return Err(Error::validation(
                "the max_features_fraction axis requires a random forest",
            ))
        }
        (SweepAxis::Gamma, ClassifierKind::Svc { gamma, .. }) => *gamma = value,
        (SweepAxis::Gamma, _) => {
            return Err(Error::validation("the gamma axis requires an SVC"))
        }
        (SweepAxis::FeatureFraction, _) => out.feature_fraction = value,
        (SweepAxis::WindowSeconds | SweepAxis::Overlap, _) => {}
    }
    Ok(out)
}

/// Re-run cross-validation along one axis. Segmentation axes re-segment the
/// recordings per value (streaming feature extraction, the window tensor is
/// never materialized); other axes reuse one feature matrix.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    recordings: &[crate::data::Recording],
    base_segmentation: &SegmentationSpec,
    spec: &PipelineSpec,
    axis: SweepAxis,
    values: &[f64],
    kind: FoldKind,
    k: usize,
) -> Result<SweepCurve> {
    if values.is_empty() {
        return Err(Error::validation("sweep needs at least one value"));
    }
    if !spec.classifier.uses_features() {
        return Err(Error::validation("sweeps cover the feature classifiers only"));
    }
    let mut points = Vec::with_capacity(values.len());
    let mut warnings = Vec::new();
    let base_features = if axis.is_segmentation() {
        None
    } else {
        Some(featurize_recordings(recordings, base_segmentation)?)
    };
    for &value in values {
        let features = match &base_features {
            Some(f) => f.clone(),
            None => {
                let mut seg = base_segmentation.clone();
                match axis {
                    SweepAxis::WindowSeconds => seg.window_seconds = value,
                    SweepAxis::Overlap => seg.overlap_fraction = value,
                    _ => unreachable!(),
                }
                seg.validate()?;
                featurize_recordings(recordings, &seg)?
            }
        };
        let geom = WindowGeometry::of_features(&features)?;
        let plan = match kind {
            FoldKind::Temporal => plan_temporal_folds_of(geom, k)?,
            FoldKind::Subject => plan_subject_folds_of(geom, k, spec.seed)?,
        };
        let point_spec = spec_with_value(spec, axis, value)?;
        let report = cross_validate(&features, &plan, &point_spec)?;
        warnings.extend(
            report
                .warnings
                .iter()
                .map(|w| format!("{}={value}: {w}", axis.as_str())),
        );
        points.push(SweepPoint {
            value,
            mean_validation_accuracy: report.validation_accuracy_mean,
            std_validation_accuracy: report.validation_accuracy_std,
        });
    }
    Ok(SweepCurve { axis: axis.as_str().to_string(), points, warnings })
}
