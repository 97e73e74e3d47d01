//! Generate a small synthetic dataset and write it to disk in the on-disk
//! layout the ingestion stage expects: a `manifest.json` plus one CSV per
//! recording.
//!
//!     cargo run --example synthesize_dataset

use std::fs;
use std::path::Path;

use physio_arc::data::write_recording_csv;
use physio_arc::synth::{energy_contrast, generate_dataset, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SynthConfig { n_subjects: 3, reps_per_set: 8, ..SynthConfig::default() };
    let (recordings, manifest) = generate_dataset(&cfg)?;

    println!(
        "{} recordings ({} subjects x {} classes x 2 sides), fs {} Hz",
        recordings.len(),
        cfg.n_subjects,
        physio_arc::ExerciseClass::COUNT,
        cfg.fs_hz
    );
    for rec in recordings.iter().take(4) {
        let active = rec.annotation.expect("generated recordings carry annotations");
        let (act, rest) = energy_contrast(rec);
        println!(
            "  {:<16} {:>5} samples, active [{:>4}, {:>4}), |a|^2 active/rest = {:.1}/{:.2} g^2",
            rec.id,
            rec.samples.len(),
            active.start,
            active.end,
            act,
            rest
        );
    }
    println!("  ...");

    let out = Path::new("target/example-output/dataset");
    fs::create_dir_all(out.join("data"))?;
    fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    for (rec, entry) in recordings.iter().zip(&manifest.files) {
        fs::write(out.join(&entry.path), write_recording_csv(rec))?;
    }
    println!("wrote {} CSVs and manifest.json under {}", manifest.files.len(), out.display());
    Ok(())
}
