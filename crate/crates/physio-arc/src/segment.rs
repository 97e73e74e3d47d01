//! Sliding-window segmentation of annotated recordings into the N × L × 6
//! window tensor.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{ExerciseClass, Interval, Recording, Side};
use crate::error::{Error, Result};

pub const CHANNELS: usize = 6;
pub const CHANNEL_NAMES: [&str; CHANNELS] = ["ax", "ay", "az", "wx", "wy", "wz"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentationSpec {
    pub window_seconds: f64,
    /// Fraction of window length shared by consecutive windows, in [0, 1).
    pub overlap_fraction: f64,
    pub fs_hz: f64,
}

impl SegmentationSpec {
    pub fn new(window_seconds: f64, overlap_fraction: f64, fs_hz: f64) -> SegmentationSpec {
        SegmentationSpec { window_seconds, overlap_fraction, fs_hz }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.window_seconds.is_finite() && self.window_seconds > 0.0) {
            return Err(Error::validation("window_seconds must be positive"));
        }
        if !(0.0..1.0).contains(&self.overlap_fraction) {
            return Err(Error::validation(format!(
                "overlap_fraction must be in [0, 1), got {}",
                self.overlap_fraction
            )));
        }
        if !(self.fs_hz.is_finite() && self.fs_hz > 0.0) {
            return Err(Error::validation("fs_hz must be positive"));
        }
        if self.window_len() < 2 {
            return Err(Error::validation(format!(
                "window of {} s at {} Hz is {} samples; need at least 2",
                self.window_seconds,
                self.fs_hz,
                self.window_len()
            )));
        }
        Ok(())
    }

    /// Window length L in samples.
    pub fn window_len(&self) -> usize {
        (self.window_seconds * self.fs_hz).round() as usize
    }

    /// Stride s = max(1, round(L·(1 − overlap))).
    pub fn stride(&self) -> usize {
        let l = self.window_len() as f64;
        ((l * (1.0 - self.overlap_fraction)).round() as usize).max(1)
    }
}

/// Per-window provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowMeta {
    pub recording_index: usize,
    /// Absolute start sample within the source recording.
    pub start_sample: usize,
}

/// Per-recording provenance carried alongside the tensor so fold planning
/// can reason about time blocks and subjects without the raw signals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingInfo {
    pub id: String,
    pub subject_id: String,
    pub exercise: ExerciseClass,
    pub side: Side,
    pub interval: Interval,
    /// Index of this recording's first window row; windows are contiguous.
    pub first_window: usize,
    pub n_windows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowTensor {
    /// N × L × 6, row-major: window, then time step, then channel.
    pub data: Vec<f64>,
    pub n: usize,
    /// Window length L in samples.
    pub len: usize,
    pub labels: Vec<ExerciseClass>,
    pub meta: Vec<WindowMeta>,
    pub recordings: Vec<RecordingInfo>,
    pub spec: SegmentationSpec,
}

impl WindowTensor {
    /// One window as an L × 6 row-major slice.
    pub fn window(&self, i: usize) -> &[f64] {
        let stride = self.len * CHANNELS;
        &self.data[i * stride..(i + 1) * stride]
    }

    /// Channel `c` of window `i`, gathered into a vector.
    pub fn channel(&self, i: usize, c: usize) -> Vec<f64> {
        let w = self.window(i);
        (0..self.len).map(|t| w[t * CHANNELS + c]).collect()
    }
}

/// Number of windows of length `l` at stride `s` fitting in `m` samples.
pub fn window_count(m: usize, l: usize, s: usize) -> usize {
    if m < l {
        0
    } else {
        (m - l) / s + 1
    }
}

/// Segment annotated recordings into overlapping windows anchored at each
/// annotated interval's start. Windows never leave the interval, so every
/// window inherits its recording's label outright.
pub fn segment(recordings: &[Recording], spec: &SegmentationSpec) -> Result<WindowTensor> {
    spec.validate()?;
    let l = spec.window_len();
    let s = spec.stride();

    for rec in recordings {
        if rec.annotation.is_none() {
            return Err(Error::validation(format!(
                "recording {:?} has no annotation; run annotation first",
                rec.id
            )));
        }
    }

    let per_rec: Vec<(Vec<f64>, Vec<usize>)> = recordings
        .par_iter()
        .map(|rec| {
            let interval = rec.annotation.unwrap();
            let m = interval.len();
            let count = window_count(m, l, s);
            let mut data = Vec::with_capacity(count * l * CHANNELS);
            let mut starts = Vec::with_capacity(count);
            for w in 0..count {
                let start = interval.start + w * s;
                starts.push(start);
                for t in 0..l {
                    let sample = &rec.samples[start + t];
                    data.extend_from_slice(&sample.accel);
                    data.extend_from_slice(&sample.gyro);
                }
            }
            (data, starts)
        })
        .collect();

    let mut tensor = WindowTensor {
        data: Vec::new(),
        n: 0,
        len: l,
        labels: Vec::new(),
        meta: Vec::new(),
        recordings: Vec::with_capacity(recordings.len()),
        spec: *spec,
    };
    for (idx, (rec, (data, starts))) in recordings.iter().zip(per_rec).enumerate() {
        tensor.recordings.push(RecordingInfo {
            id: rec.id.clone(),
            subject_id: rec.subject_id.clone(),
            exercise: rec.exercise,
            side: rec.side,
            interval: rec.annotation.unwrap(),
            first_window: tensor.n,
            n_windows: starts.len(),
        });
        for start in starts {
            tensor.labels.push(rec.exercise);
            tensor.meta.push(WindowMeta { recording_index: idx, start_sample: start });
            tensor.n += 1;
        }
        tensor.data.extend_from_slice(&data);
    }

    if tensor.n == 0 {
        return Err(Error::validation(format!(
            "no annotated interval fits a single {l}-sample window"
        )));
    }
    Ok(tensor)
}
