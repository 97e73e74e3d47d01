//! Recover the active interval of a recording from its accelerometer energy
//! profile and render the profile with the detected interval and threshold.
//!
//!     cargo run --example annotate_energy

use std::fs;
use std::path::Path;

use physio_arc::annotate::{
    annotate_active, energy_profile, DEFAULT_THRESHOLD_FRACTION, DEFAULT_WINDOW_SECONDS,
};
use physio_arc::plot::energy_svg;
use physio_arc::synth::{generate_dataset, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SynthConfig { n_subjects: 1, reps_per_set: 8, ..SynthConfig::default() };
    let (recordings, _) = generate_dataset(&cfg)?;
    let rec = &recordings[0];
    let truth = rec.annotation.expect("generated recordings carry the true interval");

    let profile = energy_profile(rec, DEFAULT_WINDOW_SECONDS, cfg.fs_hz)?;
    let detected = annotate_active(&profile, DEFAULT_THRESHOLD_FRACTION)?;

    println!("recording {}: {} samples", rec.id, rec.samples.len());
    println!("  true active   [{:>4}, {:>4})", truth.start, truth.end);
    println!("  detected      [{:>4}, {:>4})", detected.start, detected.end);
    println!(
        "  edge error    {} / {} samples (smoothing window {} samples)",
        (detected.start as i64 - truth.start as i64).abs(),
        (detected.end as i64 - truth.end as i64).abs(),
        profile.window_samples
    );

    let max = profile.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let out = Path::new("target/example-output");
    fs::create_dir_all(out)?;
    let svg = energy_svg(
        &profile,
        DEFAULT_THRESHOLD_FRACTION * max,
        Some(detected),
        &format!("energy profile, {}", rec.id),
    );
    let path = out.join("energy_profile.svg");
    fs::write(&path, svg)?;
    println!("wrote {}", path.display());
    Ok(())
}
