//! Per-window feature extraction: 13 univariate statistics on each of 8
//! signal vectors (6 axes plus the two per-sample energy vectors), Pearson
//! correlation for all 28 vector pairs, and the device side flag — 133
//! features per window.
//!
//! Conventions (fixed here, since several definitions admit variants):
//! population moments for variance/skewness/kurtosis, excess kurtosis,
//! zero values counted as positive for mean crossings, equal-width 4-bin
//! histogram over [min, max] with the last bin right-inclusive, and an
//! unnormalized DFT for spectral energy (mean |X_k|², which equals Σx² by
//! Parseval).

use std::cell::RefCell;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::data::{ExerciseClass, Side};
use crate::error::{Error, Result};
use crate::segment::{RecordingInfo, SegmentationSpec, WindowMeta, WindowTensor, CHANNELS};

pub const N_VECTORS: usize = 8;
pub const N_STATS: usize = 13;
pub const N_PAIRS: usize = 28;
pub const N_FEATURES: usize = N_VECTORS * N_STATS + N_PAIRS + 1;

pub const VECTOR_NAMES: [&str; N_VECTORS] = ["ax", "ay", "az", "wx", "wy", "wz", "ea", "ew"];
pub const STAT_NAMES: [&str; N_STATS] = [
    "mean", "var", "std", "max", "min", "skew", "kurt", "zeta", "xi", "hist0", "hist1", "hist2",
    "hist3",
];

/// The stable 133-entry feature name list.
pub fn feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(N_FEATURES);
    for v in VECTOR_NAMES {
        for s in STAT_NAMES {
            names.push(format!("{v}.{s}"));
        }
    }
    for i in 0..N_VECTORS {
        for j in (i + 1)..N_VECTORS {
            names.push(format!("corr.{}.{}", VECTOR_NAMES[i], VECTOR_NAMES[j]));
        }
    }
    names.push("side".to_string());
    names
}

/// Per-sample energies: e_a[t] = ax²+ay²+az², e_ω[t] = wx²+wy²+wz².
pub fn energy_vectors(window: &[f64], len: usize) -> (Vec<f64>, Vec<f64>) {
    let mut ea = Vec::with_capacity(len);
    let mut ew = Vec::with_capacity(len);
    for t in 0..len {
        let s = &window[t * CHANNELS..(t + 1) * CHANNELS];
        ea.push(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
        ew.push(s[3] * s[3] + s[4] * s[4] + s[5] * s[5]);
    }
    (ea, ew)
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Mean squared DFT magnitude, ξ(x) = (1/L)·Σ_k |X_k|² (unnormalized
/// forward transform); equals Σ_t x_t² by Parseval.
pub fn spectral_energy(x: &[f64]) -> f64 {
    let l = x.len();
    if l == 0 {
        return 0.0;
    }
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(l);
        let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
        fft.process(&mut buf);
        buf.iter().map(|c| c.norm_sqr()).sum::<f64>() / l as f64
    })
}

/// The 13 univariate statistics, in [`STAT_NAMES`] order.
pub fn univariate_features(x: &[f64]) -> Result<[f64; N_STATS]> {
    let l = x.len();
    if l < 2 {
        return Err(Error::validation(format!(
            "univariate features need at least 2 samples, got {l}"
        )));
    }
    let lf = l as f64;
    let mean = x.iter().sum::<f64>() / lf;
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = x.iter().cloned().fold(f64::INFINITY, f64::min);

    let (var, std, skew, kurt) = if max == min {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &v in x {
            let d = v - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        m2 /= lf;
        m3 /= lf;
        m4 /= lf;
        let std = m2.sqrt();
        if std == 0.0 {
            (m2, std, 0.0, 0.0)
        } else {
            (m2, std, m3 / (std * std * std), m4 / (m2 * m2) - 3.0)
        }
    };

    // Mean crossings: sign changes of x − mean, zeros counted positive.
    let mut zeta = 0.0;
    let mut prev_nonneg = x[0] - mean >= 0.0;
    for &v in &x[1..] {
        let nonneg = v - mean >= 0.0;
        if nonneg != prev_nonneg {
            zeta += 1.0;
        }
        prev_nonneg = nonneg;
    }

    let xi = spectral_energy(x);

    let mut hist = [0.0f64; 4];
    if max == min {
        hist[0] = lf;
    } else {
        let width = (max - min) / 4.0;
        for &v in x {
            let bin = (((v - min) / width) as usize).min(3);
            hist[bin] += 1.0;
        }
    }

    Ok([
        mean, var, std, max, min, skew, kurt, zeta, xi, hist[0], hist[1], hist[2], hist[3],
    ])
}

/// Pearson correlation with population moments; 0 when either input has zero
/// variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::validation(format!(
            "pearson length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::validation("pearson needs at least 2 samples"));
    }
    let lf = x.len() as f64;
    let mx = x.iter().sum::<f64>() / lf;
    let my = y.iter().sum::<f64>() / lf;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

/// One window (L × 6 row-major) to its 133 features.
pub fn extract_window(window: &[f64], len: usize, side: Side) -> Result<Vec<f64>> {
    let mut vectors: Vec<Vec<f64>> = (0..CHANNELS)
        .map(|c| (0..len).map(|t| window[t * CHANNELS + c]).collect())
        .collect();
    let (ea, ew) = energy_vectors(window, len);
    vectors.push(ea);
    vectors.push(ew);

    let mut out = Vec::with_capacity(N_FEATURES);
    for v in &vectors {
        out.extend_from_slice(&univariate_features(v)?);
    }
    for i in 0..N_VECTORS {
        for j in (i + 1)..N_VECTORS {
            out.push(pearson(&vectors[i], &vectors[j])?);
        }
    }
    out.push(side.as_feature());
    Ok(out)
}

/// Per-column standardization statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Free-form tag recording what the stats were fitted on (e.g. a fold id).
    pub fitted_on: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    /// n × d, row-major.
    pub values: Vec<f64>,
    pub d: usize,
    pub names: Vec<String>,
    pub labels: Vec<ExerciseClass>,
    pub meta: Vec<WindowMeta>,
    pub recordings: Vec<RecordingInfo>,
    pub spec: Option<SegmentationSpec>,
    pub scaling: Option<Scaling>,
}

impl FeatureMatrix {
    pub fn n(&self) -> usize {
        if self.d == 0 {
            0
        } else {
            self.values.len() / self.d
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }
}

/// Feature rows for a whole window tensor; row order equals window order.
pub fn extract_features(wt: &WindowTensor) -> Result<FeatureMatrix> {
    let rows: Result<Vec<Vec<f64>>> = (0..wt.n)
        .into_par_iter()
        .map(|i| {
            let side = wt.recordings[wt.meta[i].recording_index].side;
            extract_window(wt.window(i), wt.len, side)
        })
        .collect();
    let rows = rows?;
    let mut values = Vec::with_capacity(wt.n * N_FEATURES);
    for r in rows {
        values.extend_from_slice(&r);
    }
    Ok(FeatureMatrix {
        values,
        d: N_FEATURES,
        names: feature_names(),
        labels: wt.labels.clone(),
        meta: wt.meta.clone(),
        recordings: wt.recordings.clone(),
        spec: Some(wt.spec),
        scaling: None,
    })
}

/// Segment-and-featurize without keeping any window tensor in memory:
/// recordings are processed independently and only feature rows are retained.
pub fn featurize_recordings(
    recordings: &[crate::data::Recording],
    spec: &SegmentationSpec,
) -> Result<FeatureMatrix> {
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

    let per_rec: Result<Vec<(Vec<f64>, Vec<usize>)>> = recordings
        .par_iter()
        .map(|rec| {
            let interval = rec.annotation.unwrap();
            let count = crate::segment::window_count(interval.len(), l, s);
            let mut rows = Vec::with_capacity(count * N_FEATURES);
            let mut starts = Vec::with_capacity(count);
            let mut window = vec![0.0f64; l * CHANNELS];
            for w in 0..count {
                let start = interval.start + w * s;
                for t in 0..l {
                    let sample = &rec.samples[start + t];
                    window[t * CHANNELS..t * CHANNELS + 3].copy_from_slice(&sample.accel);
                    window[t * CHANNELS + 3..t * CHANNELS + 6].copy_from_slice(&sample.gyro);
                }
                rows.extend_from_slice(&extract_window(&window, l, rec.side)?);
                starts.push(start);
            }
            Ok((rows, starts))
        })
        .collect();
    let per_rec = per_rec?;

    let mut fm = FeatureMatrix {
        values: Vec::new(),
        d: N_FEATURES,
        names: feature_names(),
        labels: Vec::new(),
        meta: Vec::new(),
        recordings: Vec::with_capacity(recordings.len()),
        spec: Some(*spec),
        scaling: None,
    };
    let mut n = 0usize;
    for (idx, (rec, (rows, starts))) in recordings.iter().zip(per_rec).enumerate() {
        fm.recordings.push(RecordingInfo {
            id: rec.id.clone(),
            subject_id: rec.subject_id.clone(),
            exercise: rec.exercise,
            side: rec.side,
            interval: rec.annotation.unwrap(),
            first_window: n,
            n_windows: starts.len(),
        });
        for start in starts {
            fm.labels.push(rec.exercise);
            fm.meta.push(WindowMeta { recording_index: idx, start_sample: start });
            n += 1;
        }
        fm.values.extend_from_slice(&rows);
    }
    if n == 0 {
        return Err(Error::validation(format!(
            "no annotated interval fits a single {l}-sample window"
        )));
    }
    Ok(fm)
}

/// Per-column mean/std over the given rows only.
pub fn fit_scaling(fm: &FeatureMatrix, rows: &[usize], fitted_on: &str) -> Result<Scaling> {
    if rows.is_empty() {
        return Err(Error::validation("cannot fit scaling on an empty row set"));
    }
    let d = fm.d;
    let nf = rows.len() as f64;
    let mut mean = vec![0.0f64; d];
    for &r in rows {
        for (m, v) in mean.iter_mut().zip(fm.row(r)) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= nf;
    }
    let mut var = vec![0.0f64; d];
    for &r in rows {
        for ((s, v), m) in var.iter_mut().zip(fm.row(r)).zip(&mean) {
            let dv = v - m;
            *s += dv * dv;
        }
    }
    let std = var.iter().map(|&s| (s / nf).sqrt()).collect();
    Ok(Scaling { mean, std, fitted_on: fitted_on.to_string() })
}

/// Standardize every row with the given stats; zero-std columns map to 0.
pub fn apply_scaling(fm: &FeatureMatrix, scaling: &Scaling) -> Result<FeatureMatrix> {
    if scaling.mean.len() != fm.d || scaling.std.len() != fm.d {
        return Err(Error::validation(format!(
            "scaling dimension {} does not match feature dimension {}",
            scaling.mean.len(),
            fm.d
        )));
    }
    let mut out = fm.clone();
    for row in out.values.chunks_mut(fm.d) {
        for (j, v) in row.iter_mut().enumerate() {
            *v = if scaling.std[j] == 0.0 {
                0.0
            } else {
                (*v - scaling.mean[j]) / scaling.std[j]
            };
        }
    }
    out.scaling = Some(scaling.clone());
    Ok(out)
}

/// Scale a single row into a caller-provided buffer (no allocation).
pub fn scale_row_into(row: &[f64], scaling: &Scaling, out: &mut [f64]) {
    for (j, v) in row.iter().enumerate() {
        out[j] = if scaling.std[j] == 0.0 { 0.0 } else { (v - scaling.mean[j]) / scaling.std[j] };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn naive_dft_energy(x: &[f64]) -> f64 {
        let l = x.len();
        let mut total = 0.0;
        for k in 0..l {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &v) in x.iter().enumerate() {
                let ang = -std::f64::consts::TAU * (k as f64) * (t as f64) / l as f64;
                re += v * ang.cos();
                im += v * ang.sin();
            }
            total += re * re + im * im;
        }
        total / l as f64
    }

    #[test]
    fn name_list_shape() {
        let names = feature_names();
        assert_eq!(names.len(), N_FEATURES);
        assert_eq!(N_FEATURES, 133);
        assert_eq!(8 * 13 + 28 + 1, 133);
        let mut unique = names.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), names.len());
        assert_eq!(names[0], "ax.mean");
        assert_eq!(names[104], "corr.ax.ay");
        assert_eq!(names.last().unwrap(), "side");
    }

    #[test]
    fn alternating_window_statistics() {
        let f = univariate_features(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_eq!(f[0], 0.0); // mean
        assert_eq!(f[1], 1.0); // var
        assert_eq!(f[7], 3.0); // zeta
        assert_eq!(&f[9..13], &[2.0, 0.0, 0.0, 2.0]); // histogram
        assert_eq!(f[6], -2.0); // excess kurtosis of a ±1 square wave
    }

    #[test]
    fn constant_window_conventions() {
        let f = univariate_features(&[2.5; 7]).unwrap();
        assert_eq!(f[1], 0.0);
        assert_eq!(f[2], 0.0);
        assert_eq!(f[5], 0.0);
        assert_eq!(f[6], 0.0);
        assert_eq!(f[7], 0.0);
        assert_eq!(&f[9..13], &[7.0, 0.0, 0.0, 0.0]);
        assert!((f[8] - 7.0 * 2.5 * 2.5).abs() < 1e-9);
        assert!(univariate_features(&[1.0]).is_err());
    }

    #[test]
    fn spectral_energy_examples() {
        assert!((spectral_energy(&[1.0, 1.0, 1.0, 1.0]) - 4.0).abs() < 1e-12);
        assert_eq!(spectral_energy(&[0.0; 16]), 0.0);
        let mut rng = stream(21, &[7]);
        for _ in 0..50 {
            let x: Vec<f64> = (0..100).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let xi = spectral_energy(&x);
            let parseval: f64 = x.iter().map(|v| v * v).sum();
            assert!((xi - parseval).abs() / parseval.abs() < 1e-9);
            let naive = naive_dft_energy(&x);
            assert!((xi - naive).abs() / naive.abs() < 1e-9);
        }
    }

    #[test]
    fn univariate_matches_definition_oracle() {
        let mut rng = stream(22, &[13]);
        for _ in 0..200 {
            let x: Vec<f64> = (0..100).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let f = univariate_features(&x).unwrap();
            let lf = x.len() as f64;
            let mean: f64 = x.iter().sum::<f64>() / lf;
            let var: f64 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / lf;
            let std = var.sqrt();
            let skew = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / lf / std.powi(3);
            let kurt = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / lf / var.powi(2) - 3.0;
            let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
            let mut zeta = 0usize;
            for w in x.windows(2) {
                if ((w[0] - mean) >= 0.0) != ((w[1] - mean) >= 0.0) {
                    zeta += 1;
                }
            }
            let mut hist = [0.0; 4];
            for &v in &x {
                let b = (((v - min) / ((max - min) / 4.0)) as usize).min(3);
                hist[b] += 1.0;
            }
            let expect = [
                mean, var, std, max, min, skew, kurt, zeta as f64,
                x.iter().map(|v| v * v).sum::<f64>(),
                hist[0], hist[1], hist[2], hist[3],
            ];
            for (i, (&got, &want)) in f.iter().zip(&expect).enumerate() {
                let rel = (got - want).abs() / want.abs().max(1e-12);
                assert!(rel < 1e-9, "stat {i}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn pearson_examples() {
        let mut rng = stream(23, &[17]);
        let x: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&x, &vec![3.0; 64]).unwrap(), 0.0);
        assert!(pearson(&x, &x[..10]).is_err());

        for _ in 0..50 {
            let a: Vec<f64> = (0..80).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let b: Vec<f64> = (0..80).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let got = pearson(&a, &b).unwrap();
            let lf = 80.0;
            let (ma, mb) = (a.iter().sum::<f64>() / lf, b.iter().sum::<f64>() / lf);
            let cov: f64 =
                a.iter().zip(&b).map(|(&u, &v)| (u - ma) * (v - mb)).sum::<f64>() / lf;
            let sa = (a.iter().map(|v| (v - ma).powi(2)).sum::<f64>() / lf).sqrt();
            let sb = (b.iter().map(|v| (v - mb).powi(2)).sum::<f64>() / lf).sqrt();
            assert!((got - cov / (sa * sb)).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_window_features() {
        let window = vec![0.0; 20 * CHANNELS];
        let f = extract_window(&window, 20, Side::Right).unwrap();
        assert_eq!(f.len(), N_FEATURES);
        let names = feature_names();
        for (name, &v) in names.iter().zip(&f) {
            if name.ends_with(".hist0") {
                assert_eq!(v, 20.0, "{name}");
            } else if name == "side" {
                assert_eq!(v, 1.0);
            } else {
                assert_eq!(v, 0.0, "{name}");
            }
        }
    }

    fn random_window(rng: &mut impl Rng, l: usize) -> Vec<f64> {
        (0..l * CHANNELS).map(|_| rng.gen_range(-2.0..2.0)).collect()
    }

    #[test]
    fn reversal_leaves_order_free_stats_unchanged() {
        let mut rng = stream(24, &[3]);
        let l = 60;
        let w = random_window(&mut rng, l);
        let mut rev = vec![0.0; w.len()];
        for t in 0..l {
            rev[t * CHANNELS..(t + 1) * CHANNELS]
                .copy_from_slice(&w[(l - 1 - t) * CHANNELS..(l - t) * CHANNELS]);
        }
        let a = extract_window(&w, l, Side::Left).unwrap();
        let b = extract_window(&rev, l, Side::Left).unwrap();
        let names = feature_names();
        let invariant = ["mean", "var", "std", "max", "min", "xi", "hist0", "hist1", "hist2", "hist3"];
        for ((name, &x), &y) in names.iter().zip(&a).zip(&b) {
            if let Some(stat) = name.split('.').nth(1) {
                if name.starts_with("corr.") {
                    continue;
                }
                if invariant.contains(&stat) {
                    assert!((x - y).abs() < 1e-9, "{name}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn energy_features_invariant_under_axis_permutation() {
        let mut rng = stream(25, &[9]);
        let l = 40;
        let w = random_window(&mut rng, l);
        let mut permuted = w.clone();
        for t in 0..l {
            let base = t * CHANNELS;
            permuted.swap(base, base + 2); // ax <-> az
            permuted.swap(base + 3, base + 4); // wx <-> wy
        }
        let a = extract_window(&w, l, Side::Right).unwrap();
        let b = extract_window(&permuted, l, Side::Right).unwrap();
        let names = feature_names();
        for ((name, &x), &y) in names.iter().zip(&a).zip(&b) {
            if name.starts_with("ea.") || name.starts_with("ew.") || name == "corr.ea.ew" {
                assert!((x - y).abs() < 1e-9, "{name}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn scaling_round_trip() {
        let mut rng = stream(26, &[1]);
        let n = 50;
        let mut values = Vec::new();
        for _ in 0..n {
            values.extend((0..4).map(|j| {
                if j == 3 { 7.0 } else { rng.gen_range(-5.0..5.0) }
            }));
        }
        let fm = FeatureMatrix {
            values,
            d: 4,
            names: (0..4).map(|i| format!("f{i}")).collect(),
            labels: vec![ExerciseClass::PEN; n],
            meta: vec![],
            recordings: vec![],
            spec: None,
            scaling: None,
        };
        let rows: Vec<usize> = (0..n).collect();
        let scaling = fit_scaling(&fm, &rows, "all").unwrap();
        let scaled = apply_scaling(&fm, &scaling).unwrap();
        for j in 0..3 {
            let col: Vec<f64> = (0..n).map(|i| scaled.row(i)[j]).collect();
            let mean: f64 = col.iter().sum::<f64>() / n as f64;
            let var: f64 = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            assert!(mean.abs() < 1e-9);
            assert!((var.sqrt() - 1.0).abs() < 1e-9);
        }
        // Constant column maps to zero without dividing by zero.
        assert!((0..n).all(|i| scaled.row(i)[3] == 0.0));
        assert!(fit_scaling(&fm, &[], "none").is_err());
    }
}
