//! Cut annotated recordings into fixed-length sliding windows and show how
//! overlap changes the window count and stride.
//!
//!     cargo run --example segment_windows

use physio_arc::segment::{segment, SegmentationSpec, CHANNEL_NAMES};
use physio_arc::synth::{generate_dataset, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SynthConfig { n_subjects: 2, reps_per_set: 8, ..SynthConfig::default() };
    let (recordings, _) = generate_dataset(&cfg)?;

    for overlap in [0.0, 0.5, 0.75] {
        let spec = SegmentationSpec::new(2.0, overlap, cfg.fs_hz);
        let tensor = segment(&recordings, &spec)?;
        println!(
            "overlap {:>4}: L = {} samples, stride = {:>3}, {} windows from {} recordings",
            overlap,
            spec.window_len(),
            spec.stride(),
            tensor.n,
            tensor.recordings.len()
        );
    }

    // Windows carry provenance back to their recording and sample offset.
    let spec = SegmentationSpec::new(2.0, 0.5, cfg.fs_hz);
    let tensor = segment(&recordings, &spec)?;
    let meta = tensor.meta[0];
    let info = &tensor.recordings[meta.recording_index];
    println!(
        "\nwindow 0: recording {} ({} {}), starts at absolute sample {}",
        info.id, info.subject_id, info.exercise, meta.start_sample
    );
    let first: Vec<String> = (0..physio_arc::segment::CHANNELS)
        .map(|c| format!("{}={:+.3}", CHANNEL_NAMES[c], tensor.window(0)[c]))
        .collect();
    println!("first sample: {}", first.join(" "));
    Ok(())
}
