//! Rank features by mean Gini importance from an ExtraTrees ensemble, keep
//! the top fraction, and plot the strongest features as a bar chart.
//!
//!     cargo run --example rank_features

use std::fs;
use std::path::Path;

use physio_arc::features::featurize_recordings;
use physio_arc::plot::importance_svg;
use physio_arc::rng::derive_key;
use physio_arc::segment::SegmentationSpec;
use physio_arc::select::{apply_mask, rank_features, select_fraction};
use physio_arc::synth::{generate_dataset, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SynthConfig { n_subjects: 3, reps_per_set: 8, ..SynthConfig::default() };
    let (recordings, _) = generate_dataset(&cfg)?;
    let spec = SegmentationSpec::new(2.0, 0.5, cfg.fs_hz);
    let features = featurize_recordings(&recordings, &spec)?;

    let rows: Vec<usize> = (0..features.n()).collect();
    let seed = derive_key(cfg.seed, &[physio_arc::rng::tag::RANK]);
    let ranking = rank_features(&features, &rows, 100, None, seed)?;

    println!("top 10 of {} features by mean Gini importance:", features.d);
    for &idx in ranking.order().iter().take(10) {
        println!("  {:>14}  {:.4}", ranking.names[idx], ranking.importance[idx]);
    }

    let mask = select_fraction(&ranking, 0.75)?;
    let kept = apply_mask(&features, &mask)?;
    println!("\nkeeping 75% -> {} of {} columns", kept.d, features.d);

    let out = Path::new("target/example-output");
    fs::create_dir_all(out)?;
    let svg = importance_svg(&ranking.names, &ranking.importance, 20, "feature importance");
    let path = out.join("feature_importance.svg");
    fs::write(&path, svg)?;
    println!("wrote {}", path.display());
    Ok(())
}
