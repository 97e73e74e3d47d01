//! Active-interval annotation by thresholding moving-average accelerometer
//! energy.
//!
//! The per-sample energy is e[t] = |a(t)|² (accelerometer only, in g²); the
//! profile is its trailing moving average over a window of ⌈T·f_s⌉ samples,
//! truncated at the start of the recording. The annotated interval is the
//! longest contiguous run at or above a fraction of the profile's maximum.

use crate::data::{Interval, Recording};
use crate::error::{Error, Result};

pub const DEFAULT_WINDOW_SECONDS: f64 = 2.0;
pub const DEFAULT_THRESHOLD_FRACTION: f64 = 0.33;

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyProfile {
    /// Moving-average energy per sample, same length as the recording.
    pub values: Vec<f64>,
    /// Averaging window length in samples.
    pub window_samples: usize,
}

/// Trailing moving-average accelerometer energy (Kahan-compensated prefix
/// sums, O(n)); samples earlier than one full window average what is
/// available so far.
pub fn energy_profile(rec: &Recording, window_seconds: f64, fs_hz: f64) -> Result<EnergyProfile> {
    if !(window_seconds.is_finite() && window_seconds > 0.0) {
        return Err(Error::validation("window_seconds must be positive"));
    }
    if !(fs_hz.is_finite() && fs_hz > 0.0) {
        return Err(Error::validation("fs_hz must be positive"));
    }
    if rec.is_empty() {
        return Err(Error::validation("cannot profile an empty recording"));
    }
    let w = (window_seconds * fs_hz).ceil() as usize;
    let w = w.max(1);

    let n = rec.len();
    let mut prefix = vec![0.0f64; n + 1];
    let mut comp = 0.0f64;
    for (i, s) in rec.samples.iter().enumerate() {
        let e = s.accel[0] * s.accel[0] + s.accel[1] * s.accel[1] + s.accel[2] * s.accel[2];
        // Kahan step keeps the running sum accurate over long recordings.
        let y = e - comp;
        let t = prefix[i] + y;
        comp = (t - prefix[i]) - y;
        prefix[i + 1] = t;
    }

    let values = (0..n)
        .map(|t| {
            let start = (t + 1).saturating_sub(w);
            (prefix[t + 1] - prefix[start]) / (t + 1 - start) as f64
        })
        .collect();
    Ok(EnergyProfile { values, window_samples: w })
}

/// Longest contiguous run with profile ≥ threshold_fraction × max, ties by
/// earliest start; half-open sample interval.
pub fn annotate_active(profile: &EnergyProfile, threshold_fraction: f64) -> Result<Interval> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(Error::validation(format!(
            "threshold_fraction must be in (0, 1), got {threshold_fraction}"
        )));
    }
    if profile.values.is_empty() {
        return Err(Error::validation("empty energy profile"));
    }
    let max = profile.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max <= 0.0 {
        return Err(Error::NoActivity(
            "energy profile is identically zero; nothing to annotate".to_string(),
        ));
    }
    let threshold = threshold_fraction * max;

    let mut best: Option<Interval> = None;
    let mut run_start: Option<usize> = None;
    for (i, &v) in profile.values.iter().enumerate() {
        if v >= threshold {
            run_start.get_or_insert(i);
        } else if let Some(start) = run_start.take() {
            consider(&mut best, Interval::new(start, i));
        }
    }
    if let Some(start) = run_start {
        consider(&mut best, Interval::new(start, profile.values.len()));
    }
    Ok(best.expect("max >= threshold guarantees at least one run"))
}

fn consider(best: &mut Option<Interval>, candidate: Interval) {
    let better = match best {
        None => true,
        Some(b) => candidate.len() > b.len(),
    };
    if better {
        *best = Some(candidate);
    }
}

/// Convenience: profile, threshold, and attach the interval to the recording.
pub fn auto_annotate(
    rec: &Recording,
    window_seconds: f64,
    threshold_fraction: f64,
    fs_hz: f64,
) -> Result<Recording> {
    let profile = energy_profile(rec, window_seconds, fs_hz)?;
    let interval = annotate_active(&profile, threshold_fraction)?;
    rec.with_annotation(interval)
}

/// Manual override of an annotation (the review step); validates bounds.
pub fn review_annotation(rec: &Recording, interval: Interval) -> Result<Recording> {
    rec.with_annotation(interval)
}
