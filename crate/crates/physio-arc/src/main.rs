//! Command-line front end: each subcommand wraps one library operation with
//! file I/O. Exit codes: 0 success, 2 validation, 3 I/O, 4 convergence,
//! 5 internal.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use physio_arc::annotate::{annotate_active, energy_profile, DEFAULT_THRESHOLD_FRACTION, DEFAULT_WINDOW_SECONDS};
use physio_arc::container::{
    annotations_to_json, model_to_json, read_features, read_tensor, write_features, write_tensor,
    ModelArtifact, ModelKind,
};
use physio_arc::data::{ingest_recording, load_manifest, validate_manifest, ExerciseClass, Recording};
use physio_arc::error::{Error, Result};
use physio_arc::eval::{sweep, ClassifierKind, FoldKind, SweepAxis};
use physio_arc::features::{fit_scaling, scale_row_into};
use physio_arc::knn::{knn_fit, knn_predict};
use physio_arc::nn::{crnn_predict, crnn_train};
use physio_arc::pipeline::{
    classifier_slug, load_recordings, parse_classifier_spec, parse_run_config, run_pipeline,
    write_all, DatasetSource,
};
use physio_arc::plot::{confusion_svg, energy_svg, importance_svg, sweep_svg};
use physio_arc::report::{parse_report_json, parse_timings_json, render_table, sweep_csv};
use physio_arc::rng::{derive_key, tag};
use physio_arc::segment::{segment, SegmentationSpec};
use physio_arc::select::{apply_mask, rank_features, select_fraction};
use physio_arc::svm::{svc_fit, svc_predict, SvcParams};
use physio_arc::synth::{generate_dataset, SynthConfig};
use physio_arc::trees::{fit_forest, predict_forest, ForestMode, ForestParams};

const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Parser)]
#[command(name = "physio-arc", version, about = "Shoulder-exercise activity recognition chain")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset directory (manifest + CSVs + annotations).
    Synth {
        #[arg(long)]
        out: PathBuf,
        /// JSON synthesis config; flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        subjects: Option<usize>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        shift: Option<f64>,
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Load and validate a dataset, printing a summary.
    Ingest {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Detect per-recording active intervals; write a sidecar JSON.
    Annotate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_WINDOW_SECONDS)]
        window_seconds: f64,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD_FRACTION)]
        threshold: f64,
        /// Directory for per-recording energy-profile SVGs.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Slice annotated recordings into a window tensor container.
    Segment {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        window_seconds: f64,
        #[arg(long, default_value_t = 0.75)]
        overlap: f64,
        /// Annotation sidecar; omitted → automatic energy thresholding.
        #[arg(long)]
        annotations: Option<PathBuf>,
    },
    /// Extract the 133-column feature matrix.
    Featurize {
        /// Stream straight from a dataset (memory-friendly).
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Or read a stored window tensor.
        #[arg(long)]
        tensor: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        window_seconds: f64,
        #[arg(long, default_value_t = 0.75)]
        overlap: f64,
    },
    /// Rank features by ensemble impurity decrease.
    Rank {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = physio_arc::select::DEFAULT_RANKING_TREES)]
        trees: usize,
        #[arg(long)]
        max_features: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Importance bar chart output.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        top: usize,
    },
    /// Fit one classifier on a whole feature matrix (or tensor for crnn).
    Train {
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        tensor: Option<PathBuf>,
        /// e.g. knn:k=1 | rf:trees=150,max_features=0.1 | svc:c=1,gamma=0.005 | crnn:epochs=30
        #[arg(long)]
        classifier: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = physio_arc::select::DEFAULT_FEATURE_FRACTION)]
        feature_fraction: f64,
        #[arg(long, default_value_t = physio_arc::select::DEFAULT_RANKING_TREES)]
        ranking_trees: usize,
    },
    /// Run the full cross-validation pipeline from a JSON run config.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-evaluate along one axis; writes a CSV curve and an SVG.
    Sweep {
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// JSON synthesis config used when no manifest is given.
        #[arg(long)]
        synth_config: Option<PathBuf>,
        /// window_seconds | overlap | k | max_features_fraction | gamma | feature_fraction
        #[arg(long)]
        axis: String,
        /// Comma-separated numbers, e.g. 0,0.5,0.75,0.9,0.95
        #[arg(long)]
        values: String,
        #[arg(long)]
        classifier: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "temporal")]
        protocol: String,
        #[arg(long, default_value_t = physio_arc::eval::DEFAULT_FOLDS)]
        folds: usize,
        #[arg(long, default_value_t = 2.0)]
        window_seconds: f64,
        #[arg(long, default_value_t = 0.75)]
        overlap: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Render stored evaluation reports as a text table and SVG figures.
    Report {
        /// Run directory holding report_*.json (+ timings.json).
        #[arg(long)]
        run: Option<PathBuf>,
        /// Explicit report files (alternative to --run).
        #[arg(long)]
        report: Vec<PathBuf>,
        #[arg(long)]
        timings: Option<PathBuf>,
        /// Directory for table.txt and confusion SVGs; omit for stdout only.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .ok();
    }
    if let Err(e) = dispatch(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, text)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn load_dataset(manifest_path: &Path) -> Result<(Vec<Recording>, f64)> {
    let manifest = load_manifest(&read_text(manifest_path)?)?;
    validate_manifest(&manifest)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut recordings = Vec::with_capacity(manifest.files.len());
    for entry in &manifest.files {
        let csv = read_text(&base.join(&entry.path))?;
        recordings.push(ingest_recording(&csv, entry, manifest.fs_hz)?);
    }
    Ok((recordings, manifest.fs_hz))
}

fn annotate_all(recordings: &[Recording], fs_hz: f64) -> Result<Vec<Recording>> {
    recordings
        .iter()
        .map(|r| {
            let profile = energy_profile(r, DEFAULT_WINDOW_SECONDS, fs_hz)?;
            r.with_annotation(annotate_active(&profile, DEFAULT_THRESHOLD_FRACTION)?)
        })
        .collect()
}

fn class_names() -> Vec<&'static str> {
    ExerciseClass::ALL.iter().map(|c| c.as_str()).collect()
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Synth { out, config, subjects, reps, seed, shift, noise } => {
            let mut cfg = match config {
                Some(path) => serde_json::from_str::<SynthConfig>(&read_text(&path)?)?,
                None => SynthConfig::default(),
            };
            if let Some(v) = subjects {
                cfg.n_subjects = v;
            }
            if let Some(v) = reps {
                cfg.reps_per_set = v;
            }
            if let Some(v) = seed {
                cfg.seed = v;
            }
            if let Some(v) = shift {
                cfg.subject_shift_strength = v;
            }
            if let Some(v) = noise {
                cfg.noise_std = v;
            }
            let (recordings, manifest) = generate_dataset(&cfg)?;
            let mut files: Vec<(PathBuf, Vec<u8>)> = Vec::with_capacity(recordings.len() + 2);
            files.push((
                PathBuf::from("manifest.json"),
                serde_json::to_string_pretty(&manifest)?.into_bytes(),
            ));
            let mut annotations = BTreeMap::new();
            for rec in &recordings {
                files.push((
                    PathBuf::from(format!("data/{}.csv", rec.id)),
                    physio_arc::data::write_recording_csv(rec).into_bytes(),
                ));
                if let Some(interval) = rec.annotation {
                    annotations.insert(rec.id.clone(), interval);
                }
            }
            files.push((
                PathBuf::from("annotations.json"),
                annotations_to_json(&annotations)?.into_bytes(),
            ));
            fs::create_dir_all(out.join("data"))?;
            let written = write_all(&out, &files)?;
            println!(
                "wrote {} recordings ({} files) to {}",
                recordings.len(),
                written.len(),
                out.display()
            );
            Ok(())
        }
        Command::Ingest { manifest } => {
            let (recordings, fs_hz) = load_dataset(&manifest)?;
            let subjects: std::collections::BTreeSet<&str> =
                recordings.iter().map(|r| r.subject_id.as_str()).collect();
            let total: usize = recordings.iter().map(|r| r.samples.len()).sum();
            let summary = serde_json::json!({
                "recordings": recordings.len(),
                "subjects": subjects.len(),
                "fs_hz": fs_hz,
                "total_samples": total,
                "total_seconds": total as f64 / fs_hz,
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(())
        }
        Command::Annotate { manifest, out, window_seconds, threshold, svg } => {
            let (recordings, fs_hz) = load_dataset(&manifest)?;
            let mut intervals = BTreeMap::new();
            let mut svgs: Vec<(PathBuf, Vec<u8>)> = Vec::new();
            for rec in &recordings {
                let profile = energy_profile(rec, window_seconds, fs_hz)?;
                let interval = annotate_active(&profile, threshold)?;
                if svg.is_some() {
                    let peak = profile.values.iter().cloned().fold(0.0f64, f64::max);
                    svgs.push((
                        PathBuf::from(format!("energy_{}.svg", rec.id)),
                        energy_svg(&profile, threshold * peak, Some(interval), &rec.id)
                            .into_bytes(),
                    ));
                }
                intervals.insert(rec.id.clone(), interval);
            }
            write_text(&out, &annotations_to_json(&intervals)?)?;
            if let Some(dir) = svg {
                write_all(&dir, &svgs)?;
            }
            println!("annotated {} recordings -> {}", intervals.len(), out.display());
            Ok(())
        }
        Command::Segment { manifest, out, window_seconds, overlap, annotations } => {
            let (recordings, fs_hz) = load_dataset(&manifest)?;
            let recordings = match annotations {
                Some(path) => {
                    let map = physio_arc::container::annotations_from_json(&read_text(&path)?)?;
                    recordings
                        .iter()
                        .map(|r| {
                            let interval = map.get(&r.id).ok_or_else(|| {
                                Error::validation(format!("no annotation for recording {}", r.id))
                            })?;
                            r.with_annotation(*interval)
                        })
                        .collect::<Result<Vec<_>>>()?
                }
                None => annotate_all(&recordings, fs_hz)?,
            };
            let spec = SegmentationSpec::new(window_seconds, overlap, fs_hz);
            let tensor = segment(&recordings, &spec)?;
            if let Some(parent) = out.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)?;
                }
            }
            let mut w = BufWriter::new(fs::File::create(&out)?);
            write_tensor(&mut w, &tensor)?;
            println!(
                "{} windows of {} samples -> {}",
                tensor.n,
                tensor.len,
                out.display()
            );
            Ok(())
        }
        Command::Featurize { manifest, tensor, out, window_seconds, overlap } => {
            let fm = match (manifest, tensor) {
                (Some(path), None) => {
                    let (recordings, fs_hz) = load_dataset(&path)?;
                    let recordings = annotate_all(&recordings, fs_hz)?;
                    let spec = SegmentationSpec::new(window_seconds, overlap, fs_hz);
                    physio_arc::features::featurize_recordings(&recordings, &spec)?
                }
                (None, Some(path)) => {
                    let mut r = BufReader::new(fs::File::open(&path)?);
                    physio_arc::features::extract_features(&read_tensor(&mut r)?)?
                }
                _ => {
                    return Err(Error::validation(
                        "featurize needs exactly one of --manifest or --tensor",
                    ))
                }
            };
            if let Some(parent) = out.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)?;
                }
            }
            let mut w = BufWriter::new(fs::File::create(&out)?);
            write_features(&mut w, &fm)?;
            println!("{} rows x {} features -> {}", fm.n(), fm.d, out.display());
            Ok(())
        }
        Command::Rank { features, out, trees, max_features, seed, svg, top } => {
            let mut r = BufReader::new(fs::File::open(&features)?);
            let fm = read_features(&mut r)?;
            let rows: Vec<usize> = (0..fm.n()).collect();
            let ranking = rank_features(&fm, &rows, trees, max_features, seed)?;
            write_text(&out, &serde_json::to_string_pretty(&ranking)?)?;
            if let Some(path) = svg {
                write_text(
                    &path,
                    &importance_svg(&ranking.names, &ranking.importance, top, "feature importance"),
                )?;
            }
            let order = ranking.order();
            println!("ranked {} features -> {}", ranking.names.len(), out.display());
            for &i in order.iter().take(top.min(10)) {
                println!("  {:<18} {:.4}", ranking.names[i], ranking.importance[i]);
            }
            Ok(())
        }
        Command::Train {
            features,
            tensor,
            classifier,
            out,
            seed,
            feature_fraction,
            ranking_trees,
        } => {
            let kind = parse_classifier_spec(&classifier)?;
            let artifact = match (&kind, features, tensor) {
                (ClassifierKind::Crnn { config }, None, Some(path)) => {
                    let mut r = BufReader::new(fs::File::open(&path)?);
                    let wt = read_tensor(&mut r)?;
                    let mut config = config.clone();
                    config.seed = derive_key(seed, &[tag::CLASSIFIER]);
                    let model = crnn_train(&wt, &config)?;
                    let (pred, _) = crnn_predict(&model, &wt)?;
                    let truth: Vec<usize> = wt.labels.iter().map(|l| l.index()).collect();
                    ModelArtifact {
                        classifier: ModelKind::Crnn(model),
                        scaling: None,
                        mask: None,
                        feature_names: vec![],
                        segmentation: Some(wt.spec),
                        n_classes: config.n_classes,
                        training_accuracy: physio_arc::eval::accuracy(&truth, &pred),
                    }
                }
                (ClassifierKind::Crnn { .. }, _, None) => {
                    return Err(Error::validation("crnn trains from --tensor"))
                }
                (_, Some(path), None) => {
                    let mut r = BufReader::new(fs::File::open(&path)?);
                    let fm = read_features(&mut r)?;
                    let rows: Vec<usize> = (0..fm.n()).collect();
                    let scaling = fit_scaling(&fm, &rows, "all rows")?;
                    let ranking =
                        rank_features(&fm, &rows, ranking_trees, None, derive_key(seed, &[tag::RANK]))?;
                    let mask = select_fraction(&ranking, feature_fraction)?;
                    let masked = apply_mask(&fm, &mask)?;
                    let mut x = Vec::with_capacity(fm.n() * mask.len());
                    let mut scaled = vec![0.0f64; fm.d];
                    for i in 0..fm.n() {
                        scale_row_into(fm.row(i), &scaling, &mut scaled);
                        for &c in &mask.indices {
                            x.push(scaled[c]);
                        }
                    }
                    let y: Vec<usize> = fm.labels.iter().map(|l| l.index()).collect();
                    let d = mask.len();
                    let n_classes = ExerciseClass::COUNT;
                    let (model, pred) = match &kind {
                        ClassifierKind::Knn { k } => {
                            let m = knn_fit(&x, &y, d, n_classes, *k)?;
                            let p = knn_predict(&m, &x, d)?;
                            (ModelKind::Knn(m), p)
                        }
                        ClassifierKind::RandomForest { n_estimators, max_features_fraction } => {
                            let params = ForestParams::new(
                                ForestMode::RandomForest,
                                *n_estimators,
                                *max_features_fraction,
                                derive_key(seed, &[tag::CLASSIFIER]),
                            );
                            let m = fit_forest(&x, &y, d, n_classes, &params)?;
                            let p = predict_forest(&m, &x, d)?.0;
                            (ModelKind::RandomForest(m), p)
                        }
                        ClassifierKind::Svc { c, gamma } => {
                            let params = SvcParams { c: *c, gamma: *gamma, ..SvcParams::default() };
                            let m = svc_fit(&x, &y, d, n_classes, &params)?;
                            let p = svc_predict(&m, &x, d)?;
                            (ModelKind::Svc(m), p)
                        }
                        ClassifierKind::Crnn { .. } => unreachable!(),
                    };
                    ModelArtifact {
                        classifier: model,
                        scaling: Some(scaling),
                        mask: Some(mask),
                        feature_names: masked.names,
                        segmentation: fm.spec,
                        n_classes,
                        training_accuracy: physio_arc::eval::accuracy(&y, &pred),
                    }
                }
                _ => {
                    return Err(Error::validation(
                        "train needs exactly one of --features or --tensor",
                    ))
                }
            };
            write_text(&out, &model_to_json(&artifact)?)?;
            println!(
                "{} trained, training accuracy {:.4} -> {}",
                artifact.classifier.name(),
                artifact.training_accuracy,
                out.display()
            );
            Ok(())
        }
        Command::Evaluate { config, out } => {
            let mut cfg = parse_run_config(&read_text(&config)?)?;
            if let Some(dir) = out {
                cfg.out_dir = dir;
            }
            let summary = run_pipeline(&cfg)?;
            let table = read_text(&cfg.out_dir.join("table.txt"))?;
            print!("{table}");
            println!(
                "{} reports, {} files -> {}",
                summary.reports.len(),
                summary.written.len(),
                cfg.out_dir.display()
            );
            Ok(())
        }
        Command::Sweep {
            manifest,
            synth_config,
            axis,
            values,
            classifier,
            out,
            protocol,
            folds,
            window_seconds,
            overlap,
            seed,
        } => {
            let axis = parse_axis(&axis)?;
            let parsed_values = parse_values(&values)?;
            let kind = match protocol.as_str() {
                "temporal" => FoldKind::Temporal,
                "subject" => FoldKind::Subject,
                other => {
                    return Err(Error::validation(format!(
                        "unknown protocol {other:?}; expected temporal or subject"
                    )))
                }
            };
            let source = match (manifest, synth_config) {
                (Some(path), None) => DatasetSource::Manifest { path },
                (None, Some(path)) => DatasetSource::Synth {
                    config: serde_json::from_str(&read_text(&path)?)?,
                },
                _ => {
                    return Err(Error::validation(
                        "sweep needs exactly one of --manifest or --synth-config",
                    ))
                }
            };
            let (recordings, fs_hz) =
                load_recordings(&source, DEFAULT_WINDOW_SECONDS, DEFAULT_THRESHOLD_FRACTION)?;
            let seg = SegmentationSpec::new(window_seconds, overlap, fs_hz);
            let spec = physio_arc::eval::PipelineSpec {
                classifier: parse_classifier_spec(&classifier)?,
                seed,
                ..physio_arc::eval::PipelineSpec::default()
            };
            let curve = sweep(&recordings, &seg, &spec, axis, &parsed_values, kind, folds)?;
            let slug = classifier_slug(&spec.classifier);
            let files = vec![
                (
                    PathBuf::from(format!("sweep_{}_{slug}.csv", curve.axis)),
                    sweep_csv(&curve).into_bytes(),
                ),
                (
                    PathBuf::from(format!("sweep_{}_{slug}.svg", curve.axis)),
                    sweep_svg(&curve, &format!("{} sweep — {}", curve.axis, spec.classifier.label()))
                        .into_bytes(),
                ),
            ];
            write_all(&out, &files)?;
            for p in &curve.points {
                println!(
                    "{} = {:<8} accuracy {:.4} ± {:.4}",
                    curve.axis, p.value, p.mean_validation_accuracy, p.std_validation_accuracy
                );
            }
            println!("-> {}", out.display());
            Ok(())
        }
        Command::Report { run, report, timings, out } => {
            let mut report_paths = report;
            let mut timings_path = timings;
            if let Some(dir) = run {
                let mut entries: Vec<PathBuf> = fs::read_dir(&dir)?
                    .filter_map(|e| e.ok())
                    .map(|e| e.path())
                    .filter(|p| {
                        p.file_name()
                            .and_then(|n| n.to_str())
                            .is_some_and(|n| n.starts_with("report_") && n.ends_with(".json"))
                    })
                    .collect();
                entries.sort();
                report_paths.extend(entries);
                let t = dir.join("timings.json");
                if timings_path.is_none() && t.exists() {
                    timings_path = Some(t);
                }
            }
            if report_paths.is_empty() {
                return Err(Error::validation(
                    "no reports found; pass --run DIR or --report FILE",
                ));
            }
            let mut stored = Vec::with_capacity(report_paths.len());
            for path in &report_paths {
                stored.push(parse_report_json(&read_text(path)?)?);
            }
            let parsed_timings = match &timings_path {
                Some(path) => Some(parse_timings_json(&read_text(path)?)?),
                None => None,
            };
            let table = render_table(&stored, parsed_timings.as_ref());
            print!("{table}");
            if let Some(dir) = out {
                let names = class_names();
                let mut files = vec![(PathBuf::from("table.txt"), table.into_bytes())];
                for s in &stored {
                    let slug = s.classifier.replace(|c: char| !c.is_alphanumeric(), "_");
                    files.push((
                        PathBuf::from(format!("confusion_{}_{}.svg", slug, s.protocol)),
                        confusion_svg(s, &names).into_bytes(),
                    ));
                }
                write_all(&dir, &files)?;
                println!("-> {}", dir.display());
            }
            Ok(())
        }
    }
}

fn parse_axis(text: &str) -> Result<SweepAxis> {
    Ok(match text {
        "window_seconds" => SweepAxis::WindowSeconds,
        "overlap" => SweepAxis::Overlap,
        "k" => SweepAxis::K,
        "max_features_fraction" => SweepAxis::MaxFeaturesFraction,
        "gamma" => SweepAxis::Gamma,
        "feature_fraction" => SweepAxis::FeatureFraction,
        other => {
            return Err(Error::validation(format!(
                "unknown axis {other:?}; expected window_seconds, overlap, k, max_features_fraction, gamma, or feature_fraction"
            )))
        }
    })
}

fn parse_values(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::validation(format!("invalid sweep value {v:?}")))
        })
        .collect()
}
