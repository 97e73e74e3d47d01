//! Train the RBF-kernel support vector classifier (one-vs-one SMO) on a
//! small standardized feature set and inspect its support vectors.
//!
//!     cargo run --example train_svm

use physio_arc::eval::accuracy;
use physio_arc::features::{featurize_recordings, fit_scaling, scale_row_into};
use physio_arc::segment::SegmentationSpec;
use physio_arc::svm::{svc_fit, svc_predict, SvcParams};
use physio_arc::synth::{generate_dataset, SynthConfig};
use physio_arc::ExerciseClass;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SynthConfig { n_subjects: 2, reps_per_set: 6, ..SynthConfig::default() };
    let (recordings, _) = generate_dataset(&cfg)?;
    let seg = SegmentationSpec::new(2.0, 0.5, cfg.fs_hz);
    let features = featurize_recordings(&recordings, &seg)?;

    // Subject s01 trains, subject s02 validates.
    let is_train =
        |row: usize| features.recordings[features.meta[row].recording_index].subject_id == "s01";
    let train_rows: Vec<usize> = (0..features.n()).filter(|&r| is_train(r)).collect();
    let val_rows: Vec<usize> = (0..features.n()).filter(|&r| !is_train(r)).collect();
    let scaling = fit_scaling(&features, &train_rows, "subject s01")?;
    let gather = |rows: &[usize]| {
        let mut x = Vec::with_capacity(rows.len() * features.d);
        let mut y = Vec::with_capacity(rows.len());
        let mut scaled = vec![0.0; features.d];
        for &r in rows {
            scale_row_into(features.row(r), &scaling, &mut scaled);
            x.extend_from_slice(&scaled);
            y.push(features.labels[r].index());
        }
        (x, y)
    };
    let (x_train, y_train) = gather(&train_rows);
    let (x_val, y_val) = gather(&val_rows);

    let params = SvcParams { c: 10.0, gamma: 0.005, ..SvcParams::default() };
    let model = svc_fit(&x_train, &y_train, features.d, ExerciseClass::COUNT, &params)?;

    println!(
        "one-vs-one SVC: {} pair machines over {} classes (C = {}, gamma = {})",
        model.pairs.len(),
        ExerciseClass::COUNT,
        params.c,
        params.gamma
    );
    for m in model.pairs.iter().take(3) {
        println!(
            "  pair ({} vs {}): {} support vectors, b = {:+.3}, converged = {}",
            ExerciseClass::ALL[m.class_a],
            ExerciseClass::ALL[m.class_b],
            m.alpha.len(),
            m.b,
            m.converged
        );
    }
    println!("  ...");

    let train_pred = svc_predict(&model, &x_train, features.d)?;
    let val_pred = svc_predict(&model, &x_val, features.d)?;
    println!("training accuracy (s01): {:.4}", accuracy(&y_train, &train_pred));
    println!("held-out accuracy (s02): {:.4}", accuracy(&y_val, &val_pred));
    Ok(())
}
