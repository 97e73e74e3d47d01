//! Sweep the window overlap fraction and watch cross-validated accuracy
//! respond, producing the CSV and SVG forms of the curve.
//!
//!     cargo run --release --example sweep_overlap

use std::fs;

use physio_arc::eval::{sweep, ClassifierKind, FoldKind, PipelineSpec, SweepAxis};
use physio_arc::plot::sweep_svg;
use physio_arc::report::sweep_csv;
use physio_arc::segment::SegmentationSpec;
use physio_arc::synth::{generate_dataset, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SynthConfig { n_subjects: 6, reps_per_set: 6, ..SynthConfig::default() };
    let (recordings, _) = generate_dataset(&cfg)?;
    let seg = SegmentationSpec::new(2.0, 0.0, cfg.fs_hz);

    let spec = PipelineSpec {
        classifier: ClassifierKind::RandomForest { n_estimators: 40, max_features_fraction: 0.10 },
        ranking_trees: 40,
        ..PipelineSpec::default()
    };
    let curve = sweep(
        &recordings,
        &seg,
        &spec,
        SweepAxis::Overlap,
        &[0.0, 0.25, 0.5, 0.75],
        FoldKind::Temporal,
        5,
    )?;

    println!("axis: {}", curve.axis);
    for point in &curve.points {
        println!(
            "  overlap {:.2} -> accuracy {:.4} (+-{:.4})",
            point.value, point.mean_validation_accuracy, point.std_validation_accuracy
        );
    }

    let out_dir = std::path::Path::new("target/example-output");
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("overlap_sweep.csv"), sweep_csv(&curve))?;
    fs::write(
        out_dir.join("overlap_sweep.svg"),
        sweep_svg(&curve, "window overlap vs accuracy"),
    )?;
    println!("wrote {}/overlap_sweep.{{csv,svg}}", out_dir.display());
    Ok(())
}
