//! Train a small convolutional-recurrent network directly on raw windows
//! (no feature extraction) and plot its loss history.
//!
//! The full-size network is expensive on a laptop CPU; this example shrinks
//! the filter and LSTM widths so it finishes in well under a minute.
//!
//!     cargo run --release --example train_crnn

use std::fs;

use physio_arc::eval::accuracy;
use physio_arc::nn::{crnn_predict, crnn_train, plan_shapes, AdamParams, CrnnConfig};
use physio_arc::plot::history_svg;
use physio_arc::segment::{segment, SegmentationSpec};
use physio_arc::synth::{generate_dataset, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SynthConfig { n_subjects: 2, reps_per_set: 5, ..SynthConfig::default() };
    let (recordings, _) = generate_dataset(&cfg)?;
    // 1-second windows keep the sequence short; the network sees raw samples.
    let seg = SegmentationSpec::new(1.0, 0.5, cfg.fs_hz);
    let (train_recs, val_recs): (Vec<_>, Vec<_>) =
        recordings.into_iter().partition(|r| r.subject_id == "s01");
    let train = segment(&train_recs, &seg)?;
    let val = segment(&val_recs, &seg)?;

    let config = CrnnConfig {
        conv_filters: [8, 8],
        lstm_units: [16, 16],
        epochs: 30,
        batch_size: 32,
        adam: AdamParams { lr: 5e-3, ..AdamParams::default() },
        ..CrnnConfig::default()
    };
    let plan = plan_shapes(train.len, &config)?;
    println!(
        "window of {} samples -> conv stack emits {} steps x {} channels -> LSTM -> {} classes",
        train.len, plan.pool2_len, config.conv_filters[1], config.n_classes
    );

    let model = crnn_train(&train, &config)?;
    for epoch in &model.history {
        println!(
            "epoch {:>2}: loss {:.4}  train accuracy {:.4}",
            epoch.epoch, epoch.loss, epoch.accuracy
        );
    }

    let (train_pred, _) = crnn_predict(&model, &train)?;
    let (val_pred, _) = crnn_predict(&model, &val)?;
    let train_y: Vec<usize> = train.labels.iter().map(|c| c.index()).collect();
    let val_y: Vec<usize> = val.labels.iter().map(|c| c.index()).collect();
    println!("training accuracy (s01): {:.4}", accuracy(&train_y, &train_pred));
    println!("held-out accuracy (s02): {:.4}", accuracy(&val_y, &val_pred));

    let out_dir = std::path::Path::new("target/example-output");
    fs::create_dir_all(out_dir)?;
    let svg = history_svg(&model.history, "small CRNN training history");
    fs::write(out_dir.join("crnn_history.svg"), svg)?;
    println!("wrote {}", out_dir.join("crnn_history.svg").display());
    Ok(())
}
