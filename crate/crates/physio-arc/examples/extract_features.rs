//! Turn windows into the 133-dimensional feature vectors (13 statistics for
//! each of 8 signal vectors, 28 pairwise correlations, and the device side)
//! and standardize them with training-set statistics.
//!
//!     cargo run --example extract_features

use physio_arc::features::{
    featurize_recordings, fit_scaling, scale_row_into, N_FEATURES, N_PAIRS, N_STATS, N_VECTORS,
};
use physio_arc::segment::SegmentationSpec;
use physio_arc::synth::{generate_dataset, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SynthConfig { n_subjects: 2, reps_per_set: 8, ..SynthConfig::default() };
    let (recordings, _) = generate_dataset(&cfg)?;
    let spec = SegmentationSpec::new(2.0, 0.5, cfg.fs_hz);
    let features = featurize_recordings(&recordings, &spec)?;

    println!(
        "{} windows x {} features ({} vectors x {} stats + {} correlations + side flag = {})",
        features.n(),
        features.d,
        N_VECTORS,
        N_STATS,
        N_PAIRS,
        N_FEATURES
    );

    println!("\nwindow 0 ({} {:?}):", features.recordings[0].id, features.labels[0]);
    for idx in [0usize, 2, 8, 104, 132] {
        println!("  {:>12} = {:+.4}", features.names[idx], features.row(0)[idx]);
    }

    // Standardization is fitted on explicit rows (a training fold in real
    // runs) and applied row-by-row, so validation rows never leak into it.
    let train_rows: Vec<usize> = (0..features.n() / 2).collect();
    let scaling = fit_scaling(&features, &train_rows, "first-half demo")?;
    let mut scaled = vec![0.0; features.d];
    scale_row_into(features.row(0), &scaling, &mut scaled);
    println!("\nafter scaling (fitted on {} rows, tagged '{}'):", train_rows.len(), scaling.fitted_on);
    for idx in [0usize, 2, 8, 104] {
        println!("  {:>12} = {:+.4}", features.names[idx], scaled[idx]);
    }
    Ok(())
}
