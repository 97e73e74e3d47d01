//! Project the feature space to two discriminant axes and render the class
//! clusters as an SVG scatter plot.
//!
//!     cargo run --release --example lda_embedding

use std::fs;

use physio_arc::eval::lda_embed;
use physio_arc::features::featurize_recordings;
use physio_arc::plot::scatter_svg;
use physio_arc::segment::SegmentationSpec;
use physio_arc::synth::{generate_dataset, SynthConfig};
use physio_arc::ExerciseClass;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SynthConfig { n_subjects: 4, reps_per_set: 8, ..SynthConfig::default() };
    let (recordings, _) = generate_dataset(&cfg)?;
    let seg = SegmentationSpec::new(2.0, 0.5, cfg.fs_hz);
    let features = featurize_recordings(&recordings, &seg)?;

    let points = lda_embed(&features, 2)?;
    let labels: Vec<usize> = features.labels.iter().map(|c| c.index()).collect();
    println!(
        "embedded {} windows ({} features) into 2 discriminant components",
        features.n(),
        features.d
    );

    // Per-class centroid in the embedded plane, as a quick separation check.
    for class in ExerciseClass::ALL {
        let rows: Vec<usize> =
            (0..features.n()).filter(|&r| features.labels[r] == class).collect();
        let (mut cx, mut cy) = (0.0, 0.0);
        for &r in &rows {
            cx += points[2 * r];
            cy += points[2 * r + 1];
        }
        let n = rows.len() as f64;
        println!("  {:<4} centroid ({:+.3}, {:+.3})", class.as_str(), cx / n, cy / n);
    }

    let names: Vec<&str> = ExerciseClass::ALL.iter().map(|c| c.as_str()).collect();
    let svg = scatter_svg(&points, &labels, &names, "linear discriminant embedding");
    let out_dir = std::path::Path::new("target/example-output");
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("lda_scatter.svg"), svg)?;
    println!("wrote {}", out_dir.join("lda_scatter.svg").display());
    Ok(())
}
