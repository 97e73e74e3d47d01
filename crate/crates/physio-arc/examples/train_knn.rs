//! Fit the k-nearest-neighbour classifier and inspect the actual
//! neighbourhoods behind a few predictions.
//!
//!     cargo run --example train_knn

use physio_arc::eval::accuracy;
use physio_arc::features::{featurize_recordings, fit_scaling, scale_row_into};
use physio_arc::knn::{knn_fit, knn_predict, neighbours};
use physio_arc::segment::SegmentationSpec;
use physio_arc::synth::{generate_dataset, SynthConfig};
use physio_arc::ExerciseClass;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SynthConfig { n_subjects: 3, reps_per_set: 6, ..SynthConfig::default() };
    let (recordings, _) = generate_dataset(&cfg)?;
    let seg = SegmentationSpec::new(2.0, 0.5, cfg.fs_hz);
    let features = featurize_recordings(&recordings, &seg)?;

    // Subjects s01/s02 train, s03 validates.
    let is_train =
        |row: usize| features.recordings[features.meta[row].recording_index].subject_id != "s03";
    let train_rows: Vec<usize> = (0..features.n()).filter(|&r| is_train(r)).collect();
    let val_rows: Vec<usize> = (0..features.n()).filter(|&r| !is_train(r)).collect();
    let scaling = fit_scaling(&features, &train_rows, "subjects s01-s02")?;
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

    for k in [1, 5, 15] {
        let model = knn_fit(&x_train, &y_train, features.d, ExerciseClass::COUNT, k)?;
        let pred = knn_predict(&model, &x_val, features.d)?;
        println!("k = {:>2}: held-out accuracy {:.4}", k, accuracy(&y_val, &pred));
    }

    // Peek inside one neighbourhood: which training windows drive the vote?
    let model = knn_fit(&x_train, &y_train, features.d, ExerciseClass::COUNT, 5)?;
    let query = &x_val[..features.d];
    println!(
        "\nquery window: subject s03, true class {}",
        ExerciseClass::ALL[y_val[0]]
    );
    for (rank, (dist, idx)) in neighbours(&model, query)?.into_iter().take(5).enumerate() {
        let row = train_rows[idx];
        let rec = &features.recordings[features.meta[row].recording_index];
        println!(
            "  #{}: distance {:.3}  ->  {} {} {:?} (starts at sample {})",
            rank + 1,
            dist,
            rec.subject_id,
            ExerciseClass::ALL[y_train[idx]],
            rec.side,
            features.meta[row].start_sample
        );
    }
    Ok(())
}
