//! Train a random forest on two subjects, evaluate it on a held-out third,
//! and persist the whole fitted pipeline head (scaling + feature mask +
//! forest) as a JSON model artifact.
//!
//!     cargo run --example train_random_forest

use std::fs;
use std::path::Path;

use physio_arc::container::{model_to_json, ModelArtifact, ModelKind};
use physio_arc::eval::accuracy;
use physio_arc::features::{featurize_recordings, fit_scaling, scale_row_into};
use physio_arc::rng::{derive_key, tag};
use physio_arc::segment::SegmentationSpec;
use physio_arc::select::{rank_features, select_fraction};
use physio_arc::synth::{generate_dataset, SynthConfig};
use physio_arc::trees::{fit_forest, predict_forest, ForestMode, ForestParams};
use physio_arc::ExerciseClass;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SynthConfig { n_subjects: 3, reps_per_set: 8, ..SynthConfig::default() };
    let (recordings, _) = generate_dataset(&cfg)?;
    let seg = SegmentationSpec::new(2.0, 0.5, cfg.fs_hz);
    let features = featurize_recordings(&recordings, &seg)?;

    // Hold out subject s03 entirely; train on s01 and s02.
    let is_train = |row: usize| {
        features.recordings[features.meta[row].recording_index].subject_id != "s03"
    };
    let train_rows: Vec<usize> = (0..features.n()).filter(|&r| is_train(r)).collect();
    let val_rows: Vec<usize> = (0..features.n()).filter(|&r| !is_train(r)).collect();

    // Fit scaling and feature selection on the training rows only.
    let scaling = fit_scaling(&features, &train_rows, "subjects s01+s02")?;
    let ranking = rank_features(&features, &train_rows, 100, None, derive_key(cfg.seed, &[tag::RANK]))?;
    let mask = select_fraction(&ranking, 0.75)?;

    let gather = |rows: &[usize]| {
        let mut x = Vec::with_capacity(rows.len() * mask.len());
        let mut y = Vec::with_capacity(rows.len());
        let mut scaled = vec![0.0; features.d];
        for &r in rows {
            scale_row_into(features.row(r), &scaling, &mut scaled);
            x.extend(mask.indices.iter().map(|&c| scaled[c]));
            y.push(features.labels[r].index());
        }
        (x, y)
    };
    let (x_train, y_train) = gather(&train_rows);
    let (x_val, y_val) = gather(&val_rows);

    let params = ForestParams::new(
        ForestMode::RandomForest,
        150,
        0.10,
        derive_key(cfg.seed, &[tag::CLASSIFIER]),
    );
    let forest = fit_forest(&x_train, &y_train, mask.len(), ExerciseClass::COUNT, &params)?;

    let (train_pred, _) = predict_forest(&forest, &x_train, mask.len())?;
    let (val_pred, _) = predict_forest(&forest, &x_val, mask.len())?;
    println!(
        "random forest ({} trees, {} candidate features/split) on {} features",
        params.n_estimators,
        ((0.10f64 * mask.len() as f64) as usize).max(1),
        mask.len()
    );
    println!("  training accuracy (subjects s01+s02): {:.4}", accuracy(&y_train, &train_pred));
    println!("  held-out accuracy (subject s03):      {:.4}", accuracy(&y_val, &val_pred));

    let artifact = ModelArtifact {
        classifier: ModelKind::RandomForest(forest),
        feature_names: mask.indices.iter().map(|&c| features.names[c].clone()).collect(),
        scaling: Some(scaling),
        mask: Some(mask),
        segmentation: Some(seg),
        n_classes: ExerciseClass::COUNT,
        training_accuracy: accuracy(&y_train, &train_pred),
    };
    let out = Path::new("target/example-output");
    fs::create_dir_all(out)?;
    let path = out.join("random_forest_model.json");
    fs::write(&path, model_to_json(&artifact)?)?;
    println!("wrote {}", path.display());
    Ok(())
}
