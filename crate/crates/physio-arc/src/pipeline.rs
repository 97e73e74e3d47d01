//! End-to-end orchestration: a JSON-serializable run configuration and a
//! `run_pipeline` that executes dataset loading → annotation → segmentation
//! → feature extraction → selection → training → evaluation, then writes
//! reports, plots, and a run manifest. All compute happens before any file
//! is created, so a failed run leaves no partial outputs; write failures
//! roll back files already written.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotate::{auto_annotate, DEFAULT_THRESHOLD_FRACTION, DEFAULT_WINDOW_SECONDS};
use crate::data::{ingest_recording, load_manifest, validate_manifest, ExerciseClass, Recording};
use crate::error::{Error, Result};
use crate::eval::{
    cross_validate, cross_validate_windows, plan_subject_folds_of, plan_temporal_folds_of,
    ClassifierKind, EvalReport, FoldKind, FoldPlan, PipelineSpec, WindowGeometry,
};
use crate::features::featurize_recordings;
use crate::report::{render_table, report_csv, report_json, timings_json, timings_of, StoredReport};
use crate::segment::{segment, SegmentationSpec};
use crate::synth::{generate_dataset, SynthConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DatasetSource {
    /// Deterministic synthetic dataset, annotated at generation time.
    Synth { config: SynthConfig },
    /// A manifest JSON next to per-recording CSV files.
    Manifest { path: PathBuf },
}

fn default_folds() -> usize {
    crate::eval::DEFAULT_FOLDS
}
fn default_feature_fraction() -> f64 {
    crate::select::DEFAULT_FEATURE_FRACTION
}
fn default_ranking_trees() -> usize {
    crate::select::DEFAULT_RANKING_TREES
}
fn default_annotation_window() -> f64 {
    DEFAULT_WINDOW_SECONDS
}
fn default_annotation_threshold() -> f64 {
    DEFAULT_THRESHOLD_FRACTION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: DatasetSource,
    /// `fs_hz` may be 0 to inherit the dataset's sampling rate; a nonzero
    /// value must match it.
    pub segmentation: SegmentationSpec,
    pub classifiers: Vec<ClassifierKind>,
    pub protocols: Vec<FoldKind>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_feature_fraction")]
    pub feature_fraction: f64,
    #[serde(default = "default_ranking_trees")]
    pub ranking_trees: usize,
    #[serde(default)]
    pub ranking_max_features: Option<f64>,
    #[serde(default)]
    pub validation_overlap: f64,
    #[serde(default = "default_annotation_window")]
    pub annotation_window_seconds: f64,
    #[serde(default = "default_annotation_threshold")]
    pub annotation_threshold: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads; None keeps the process default. Applied by the
    /// binary at startup, not by `run_pipeline`.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.classifiers.is_empty() {
            return Err(Error::validation("at least one classifier is required"));
        }
        if self.protocols.is_empty() {
            return Err(Error::validation("at least one protocol is required"));
        }
        let mut seen = Vec::new();
        for p in &self.protocols {
            if seen.contains(p) {
                return Err(Error::validation(format!(
                    "protocol {} listed twice",
                    p.as_str()
                )));
            }
            seen.push(*p);
        }
        if self.folds < 2 {
            return Err(Error::validation("folds must be >= 2"));
        }
        if let DatasetSource::Manifest { path } = &self.dataset {
            if !path.exists() {
                return Err(Error::Io(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("manifest {} does not exist", path.display()),
                )));
            }
        }
        Ok(())
    }
}

pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    Ok(serde_json::from_str(text)?)
}

pub fn run_config_json(cfg: &RunConfig) -> Result<String> {
    Ok(serde_json::to_string_pretty(cfg)?)
}

/// Prefix an error's message with the pipeline stage it came from,
/// preserving the error class (and therefore the exit code).
fn stage_err(stage: &str, e: Error) -> Error {
    match e {
        Error::Validation(m) => Error::Validation(format!("stage {stage}: {m}")),
        Error::Internal(m) => Error::Internal(format!("stage {stage}: {m}")),
        Error::Convergence(m) => Error::Convergence(format!("stage {stage}: {m}")),
        Error::NoActivity(m) => Error::NoActivity(format!("stage {stage}: {m}")),
        Error::Duplication(m) => Error::Duplication(format!("stage {stage}: {m}")),
        Error::Io(e) => Error::Io(std::io::Error::new(e.kind(), format!("stage {stage}: {e}"))),
        other => other,
    }
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| stage_err(name, e))
}

/// Loads and annotates every recording; returns them with the dataset's
/// sampling rate.
pub fn load_recordings(
    source: &DatasetSource,
    annotation_window_seconds: f64,
    annotation_threshold: f64,
) -> Result<(Vec<Recording>, f64)> {
    match source {
        DatasetSource::Synth { config } => {
            let (recordings, _) = stage("synth", generate_dataset(config))?;
            Ok((recordings, config.fs_hz))
        }
        DatasetSource::Manifest { path } => {
            let text = stage("ingest", fs::read_to_string(path).map_err(Error::Io))?;
            let manifest = stage("ingest", load_manifest(&text))?;
            stage("ingest", validate_manifest(&manifest))?;
            let base = path.parent().unwrap_or(Path::new("."));
            let loaded: Result<Vec<Recording>> = manifest
                .files
                .par_iter()
                .map(|entry| {
                    let csv_path = base.join(&entry.path);
                    let csv = fs::read_to_string(&csv_path).map_err(|e| {
                        stage_err(
                            "ingest",
                            Error::Io(std::io::Error::new(
                                e.kind(),
                                format!("{}: {e}", csv_path.display()),
                            )),
                        )
                    })?;
                    let rec = stage("ingest", ingest_recording(&csv, entry, manifest.fs_hz))?;
                    stage(
                        "annotate",
                        auto_annotate(
                            &rec,
                            annotation_window_seconds,
                            annotation_threshold,
                            manifest.fs_hz,
                        ),
                    )
                })
                .collect();
            Ok((loaded?, manifest.fs_hz))
        }
    }
}

/// Reconciles the configured segmentation with the dataset sampling rate.
fn resolve_segmentation(seg: &SegmentationSpec, dataset_fs: f64) -> Result<SegmentationSpec> {
    let fs = if seg.fs_hz == 0.0 { dataset_fs } else { seg.fs_hz };
    if (fs - dataset_fs).abs() > 1e-9 {
        return Err(Error::validation(format!(
            "segmentation sampling rate {fs} Hz does not match the dataset's {dataset_fs} Hz"
        )));
    }
    let resolved = SegmentationSpec::new(seg.window_seconds, seg.overlap_fraction, fs);
    resolved.validate()?;
    Ok(resolved)
}

/// Parses a command-line classifier spec: a name optionally followed by
/// `:key=value,...`. Names: `knn`, `rf`/`random_forest`, `svc`, `crnn`.
/// Examples: `knn:k=30`, `rf:trees=150,max_features=0.1`,
/// `svc:c=10,gamma=0.01`, `crnn:epochs=30,batch=32,dropout=0.1`.
pub fn parse_classifier_spec(text: &str) -> Result<ClassifierKind> {
    let (name, args) = match text.split_once(':') {
        Some((n, a)) => (n.trim(), a.trim()),
        None => (text.trim(), ""),
    };
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    if !args.is_empty() {
        for part in args.split(',') {
            let (k, v) = part.split_once('=').ok_or_else(|| {
                Error::validation(format!("expected key=value in classifier spec, got {part:?}"))
            })?;
            pairs.push((k.trim(), v.trim()));
        }
    }
    fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
        value
            .parse()
            .map_err(|_| Error::validation(format!("invalid value {value:?} for {key}")))
    }
    let reject = |key: &str| -> Error {
        Error::validation(format!("unknown key {key:?} for classifier {name:?}"))
    };
    match name {
        "knn" => {
            let mut k = 1usize;
            for (key, value) in pairs {
                match key {
                    "k" => k = num(key, value)?,
                    _ => return Err(reject(key)),
                }
            }
            Ok(ClassifierKind::Knn { k })
        }
        "rf" | "random_forest" => {
            let (mut n_estimators, mut max_features_fraction) = (150usize, 0.10f64);
            for (key, value) in pairs {
                match key {
                    "trees" => n_estimators = num(key, value)?,
                    "max_features" => max_features_fraction = num(key, value)?,
                    _ => return Err(reject(key)),
                }
            }
            Ok(ClassifierKind::RandomForest { n_estimators, max_features_fraction })
        }
        "svc" => {
            let (mut c, mut gamma) = (crate::svm::DEFAULT_C, crate::svm::DEFAULT_GAMMA);
            for (key, value) in pairs {
                match key {
                    "c" => c = num(key, value)?,
                    "gamma" => gamma = num(key, value)?,
                    _ => return Err(reject(key)),
                }
            }
            Ok(ClassifierKind::Svc { c, gamma })
        }
        "crnn" => {
            let mut config = crate::nn::CrnnConfig::default();
            for (key, value) in pairs {
                match key {
                    "epochs" => config.epochs = num(key, value)?,
                    "batch" => config.batch_size = num(key, value)?,
                    "dropout" => config.dropout = num(key, value)?,
                    "lambda" => config.lambda = num(key, value)?,
                    "lr" => config.adam.lr = num(key, value)?,
                    "kernel" => config.kernel_size = num(key, value)?,
                    "seed" => config.seed = num(key, value)?,
                    "filters" => {
                        let (a, b) = value.split_once('/').ok_or_else(|| {
                            Error::validation("filters takes the form a/b".to_string())
                        })?;
                        config.conv_filters = [num(key, a)?, num(key, b)?];
                    }
                    "units" => {
                        let (a, b) = value.split_once('/').ok_or_else(|| {
                            Error::validation("units takes the form a/b".to_string())
                        })?;
                        config.lstm_units = [num(key, a)?, num(key, b)?];
                    }
                    _ => return Err(reject(key)),
                }
            }
            Ok(ClassifierKind::Crnn { config })
        }
        _ => Err(Error::validation(format!(
            "unknown classifier {name:?}; expected knn, rf, svc, or crnn"
        ))),
    }
}

pub fn classifier_slug(kind: &ClassifierKind) -> String {
    match kind {
        ClassifierKind::Knn { k } => format!("knn_k{k}"),
        ClassifierKind::RandomForest { .. } => "random_forest".to_string(),
        ClassifierKind::Svc { .. } => "svc".to_string(),
        ClassifierKind::Crnn { .. } => "crnn".to_string(),
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub reports: Vec<EvalReport>,
    pub written: Vec<PathBuf>,
}

pub fn run_pipeline(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let (recordings, dataset_fs) =
        load_recordings(&cfg.dataset, cfg.annotation_window_seconds, cfg.annotation_threshold)?;
    let seg = resolve_segmentation(&cfg.segmentation, dataset_fs)?;

    let needs_features = cfg.classifiers.iter().any(|c| c.uses_features());
    let needs_tensor = cfg.classifiers.iter().any(|c| !c.uses_features());
    let features = if needs_features {
        Some(stage("featurize", featurize_recordings(&recordings, &seg))?)
    } else {
        None
    };
    let tensor = if needs_tensor {
        Some(stage("segment", segment(&recordings, &seg))?)
    } else {
        None
    };

    let mut reports = Vec::new();
    for protocol in &cfg.protocols {
        let geom = match (&features, &tensor) {
            (Some(f), _) => WindowGeometry::of_features(f)?,
            (None, Some(t)) => WindowGeometry::of_tensor(t),
            (None, None) => unreachable!("validated non-empty classifier roster"),
        };
        let plan: FoldPlan = stage(
            "evaluate",
            match protocol {
                FoldKind::Temporal => plan_temporal_folds_of(geom, cfg.folds),
                FoldKind::Subject => plan_subject_folds_of(geom, cfg.folds, cfg.seed),
            },
        )?;
        for classifier in &cfg.classifiers {
            let spec = PipelineSpec {
                classifier: classifier.clone(),
                feature_fraction: cfg.feature_fraction,
                ranking_trees: cfg.ranking_trees,
                ranking_max_features: cfg.ranking_max_features,
                global_selection: false,
                validation_overlap: cfg.validation_overlap,
                seed: cfg.seed,
            };
            let report = stage(
                "evaluate",
                if classifier.uses_features() {
                    cross_validate(features.as_ref().unwrap(), &plan, &spec)
                } else {
                    cross_validate_windows(tensor.as_ref().unwrap(), &plan, &spec)
                },
            )?;
            reports.push(report);
        }
    }

    let mut files: Vec<(PathBuf, Vec<u8>)> = Vec::new();
    let class_names: Vec<&str> = ExerciseClass::ALL.iter().map(|c| c.as_str()).collect();
    let stored: Vec<StoredReport> = reports.iter().map(StoredReport::from).collect();
    let mut idx = 0usize;
    for protocol in &cfg.protocols {
        for classifier in &cfg.classifiers {
            let slug = classifier_slug(classifier);
            let p = protocol.as_str();
            files.push((
                PathBuf::from(format!("report_{slug}_{p}.json")),
                report_json(&reports[idx])?.into_bytes(),
            ));
            files.push((
                PathBuf::from(format!("confusion_{slug}_{p}.svg")),
                crate::plot::confusion_svg(&stored[idx], &class_names).into_bytes(),
            ));
            idx += 1;
        }
    }
    files.push((PathBuf::from("report.csv"), report_csv(&stored).into_bytes()));
    files.push((
        PathBuf::from("table.txt"),
        render_table(&stored, Some(&timings_of(&reports))).into_bytes(),
    ));
    files.push((PathBuf::from("timings.json"), timings_json(&reports)?.into_bytes()));
    #[derive(Serialize)]
    struct RunManifest<'a> {
        version: &'static str,
        config: &'a RunConfig,
    }
    files.push((
        PathBuf::from("run_manifest.json"),
        serde_json::to_string_pretty(&RunManifest {
            version: env!("CARGO_PKG_VERSION"),
            config: cfg,
        })?
        .into_bytes(),
    ));

    let written = write_all(&cfg.out_dir, &files)?;
    Ok(RunSummary { reports, written })
}

/// Writes every (relative path, bytes) pair under `dir`; on failure removes
/// what was already written.
pub fn write_all(dir: &Path, files: &[(PathBuf, Vec<u8>)]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (rel, bytes) in files {
        let path = dir.join(rel);
        if let Err(e) = fs::write(&path, bytes) {
            for done in &written {
                let _ = fs::remove_file(done);
            }
            return Err(Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            )));
        }
        written.push(path);
    }
    Ok(written)
}
