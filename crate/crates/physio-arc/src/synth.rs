//! Deterministic synthetic dataset generator.
//!
//! Each exercise class has a hand-designed signal template: 1–3 harmonics of
//! the repetition fundamental per channel plus a class-specific constant
//! gravity orientation on the accelerometer. Subjects perturb template
//! amplitude, phase, rep period, and gravity orientation by smooth random
//! factors scaled by `subject_shift_strength`, so the cross-subject domain
//! shift is adjustable. Structural confusions are injected on purpose: FEL is
//! ABD rotated by a small angle about the vertical axis, and IR and ER are
//! mirror twins. The mirrored channels carry a single fundamental harmonic
//! and zero gravity offset, so negating them equals a half-period time shift:
//! no per-channel window statistic can separate the twins, only the signs of
//! fundamental-frequency cross-channel correlations. A per-subject
//! "coordination lag" between the mirror group and the remaining channels
//! rotates exactly that quadrature cue — far enough, for a controlled
//! fraction of subjects, that their IR matches everyone else's ER. Training
//! on a subject's own recordings resolves the convention; generalizing to an
//! unseen subject cannot, which is what opens the temporal-vs-subject
//! validation gap. Per-rep lag wobble and a slow amplitude drift across each
//! recording add window-level and block-level scatter on top, and a small
//! shift-scaled fraction of reps is executed with a badly mis-timed lag —
//! short runs whose windows land at a random angle of the quadrature cue,
//! sometimes deep in the twin class. Those stray windows sit at angles no
//! two recordings share, so a single nearest neighbour chases them while a
//! wide neighbourhood vote averages them away.
//!
//! All randomness comes from counter-based streams keyed by
//! (seed, subject, class, side, channel), so generation is order-independent
//! and parallel-safe.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::data::{
    ExerciseClass, Interval, Manifest, ManifestEntry, Recording, SensorSample, Side, Units,
};
use crate::error::{Error, Result};
use crate::rng::{stream, tag};

/// Mean active accelerometer oscillation power in g² (sum over axes of A²/2).
const ACCEL_POWER: f64 = 4.8;
/// Mean active gyro oscillation power in (rad/s)².
const GYRO_POWER: f64 = 6.0;
/// Rotation (radians, about the vertical axis) separating FEL from ABD.
const FEL_ROTATION: f64 = 0.40;
/// Rest-padding sway amplitude (g) on the horizontal accelerometer axes.
const SWAY_AMP: f64 = 0.02;
/// Channels negated between IR and ER as recorded on the right side.
const MIRROR_GROUP: [usize; 3] = [0, 4, 5];
/// Left-side recordings are themselves mirrored in (ax, wx), which conjugates
/// the IR↔ER transform to a negation of the three gyro channels; the lag
/// group must follow it or a lag-free correlation pair would stay a
/// subject-stable discriminant on half the data.
const MIRROR_GROUP_LEFT: [usize; 3] = [3, 4, 5];
/// Coordination-lag span between the mirror group and the remaining channels,
/// as a fraction of the rep period (scaled by subject_shift_strength).
const LAG_SPAN: f64 = 0.80;
/// Per-rep wobble of that lag, as a fraction of the rep period (× shift).
const REP_WOBBLE: f64 = 0.055;
/// Probability (× shift) that a rep starts a run of 2–3 reps executed with a
/// badly mis-timed coordination — the lag jumping by a large random fraction
/// of the period (see LURCH_SPAN), pushing those windows toward or past the
/// mirrored movement at an angle that differs run to run. Runs last long
/// enough that whole windows fall inside them, not just boundary mixtures.
const FLIP_START: f64 = 0.22;
/// Magnitude range of that mis-timing, as a fraction of the rep period;
/// random sign. Centered on a half period (a full inversion) but spread wide
/// so mis-timed runs scatter instead of piling up on the twin class.
const LURCH_SPAN: (f64, f64) = (0.25, 0.75);
/// Linear amplitude drift across the active span (full-span fraction × shift).
const DRIFT_SPAN: f64 = 0.45;
/// Slow sinusoidal amplitude wobble (fraction × shift) and its frequency.
const DRIFT_WOBBLE: f64 = 0.16;
const DRIFT_WOBBLE_HZ: f64 = 0.055;

const SUB_PERTURB: u64 = 1;
const SUB_NOISE: u64 = 2;
const SUB_DRIFT: u64 = 3;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_subjects: usize,
    pub reps_per_set: usize,
    /// Allowed repetition period band in seconds; perturbed periods are
    /// clamped into it.
    pub rep_period_range: (f64, f64),
    pub fs_hz: f64,
    /// Additive Gaussian noise std per channel (g and rad/s).
    pub noise_std: f64,
    /// 0 = all subjects share the class templates exactly; 1 = maximal
    /// perturbation of amplitude/phase/period/gravity.
    pub subject_shift_strength: f64,
    /// Low-energy padding prepended and appended, in seconds.
    pub rest_padding_seconds: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0x5EED,
            n_subjects: 20,
            reps_per_set: 20,
            rep_period_range: (0.9, 4.3),
            fs_hz: 50.0,
            noise_std: 0.03,
            subject_shift_strength: 0.5,
            rest_padding_seconds: 3.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subjects < 1 {
            return Err(Error::validation("n_subjects must be >= 1"));
        }
        if self.reps_per_set < 1 {
            return Err(Error::validation("reps_per_set must be >= 1"));
        }
        let (lo, hi) = self.rep_period_range;
        if !(0.5..=10.0).contains(&lo) || !(0.5..=10.0).contains(&hi) || lo >= hi {
            return Err(Error::validation(format!(
                "rep_period_range ({lo}, {hi}) must satisfy 0.5 <= lo < hi <= 10"
            )));
        }
        if !(self.fs_hz.is_finite() && self.fs_hz > 0.0) {
            return Err(Error::validation("fs_hz must be positive"));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::validation("noise_std must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.subject_shift_strength) {
            return Err(Error::validation(
                "subject_shift_strength must be in [0, 1]",
            ));
        }
        if !(self.rest_padding_seconds.is_finite() && self.rest_padding_seconds >= 0.0) {
            return Err(Error::validation("rest_padding_seconds must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Harmonic {
    k: u32,
    amp: f64,
    phase: f64,
}

impl Harmonic {
    fn new(k: u32, amp: f64, phase: f64) -> Harmonic {
        Harmonic { k, amp, phase }
    }
}

/// Per-class signal recipe; channel order ax ay az wx wy wz.
#[derive(Debug, Clone)]
struct Template {
    period: f64,
    gravity: [f64; 3],
    chans: [Vec<Harmonic>; 6],
}

impl Template {
    /// Oscillatory part only; gravity is added by the caller so drift
    /// envelopes can scale movement without tilting the constant field.
    fn osc(&self, channel: usize, t: f64) -> f64 {
        let omega = std::f64::consts::TAU / self.period;
        let mut v = 0.0;
        for h in &self.chans[channel] {
            v += h.amp * (omega * h.k as f64 * t + h.phase).sin();
        }
        v
    }

    fn gravity_term(&self, channel: usize) -> f64 {
        if channel < 3 {
            self.gravity[channel]
        } else {
            0.0
        }
    }

    /// Scale accel-channel harmonic amplitudes so Σ A²/2 = accel_power, and
    /// gyro channels likewise.
    fn normalize_power(&mut self, accel_power: f64, gyro_power: f64) {
        for (range, target) in [(0..3, accel_power), (3..6, gyro_power)] {
            let sum: f64 = self.chans[range.clone()]
                .iter()
                .flat_map(|c| c.iter().map(|h| h.amp * h.amp / 2.0))
                .sum();
            let scale = (target / sum).sqrt();
            for c in &mut self.chans[range] {
                for h in c.iter_mut() {
                    h.amp *= scale;
                }
            }
        }
    }

    /// Rotate the horizontal (x, y) axis pairs of both sensors, and gravity,
    /// by `theta` about the vertical axis. Harmonics are combined as phasors
    /// so the result is again a harmonic sum.
    fn rotate_xy(&self, theta: f64) -> Template {
        let (sin_t, cos_t) = theta.sin_cos();
        let mut out = self.clone();
        for (xi, yi) in [(0usize, 1usize), (3, 4)] {
            let (x, y) = (&self.chans[xi], &self.chans[yi]);
            out.chans[xi] = combine_phasors(x, cos_t, y, -sin_t);
            out.chans[yi] = combine_phasors(x, sin_t, y, cos_t);
        }
        let [gx, gy, gz] = self.gravity;
        out.gravity = [cos_t * gx - sin_t * gy, sin_t * gx + cos_t * gy, gz];
        out
    }

    /// Negate a set of channels (mirror transform); gravity x follows ax.
    fn mirror(&self, channels: &[usize]) -> Template {
        let mut out = self.clone();
        for &c in channels {
            for h in &mut out.chans[c] {
                h.amp = -h.amp;
            }
            if c == 0 {
                out.gravity[0] = -out.gravity[0];
            }
        }
        out
    }
}

/// a·x + b·y on per-harmonic phasors: harmonics of equal k add as complex
/// amplitudes A·e^{iφ}.
fn combine_phasors(x: &[Harmonic], a: f64, y: &[Harmonic], b: f64) -> Vec<Harmonic> {
    let mut acc: Vec<(u32, f64, f64)> = Vec::new(); // (k, re, im)
    let mut add = |h: &Harmonic, w: f64| {
        // sin(ωkt + φ) carries phasor e^{iφ}
        let re = w * h.amp * h.phase.cos();
        let im = w * h.amp * h.phase.sin();
        match acc.iter_mut().find(|(k, _, _)| *k == h.k) {
            Some(slot) => {
                slot.1 += re;
                slot.2 += im;
            }
            None => acc.push((h.k, re, im)),
        }
    };
    for h in x {
        add(h, a);
    }
    for h in y {
        add(h, b);
    }
    acc.sort_by_key(|(k, _, _)| *k);
    acc.into_iter()
        .filter(|(_, re, im)| re.hypot(*im) > 1e-12)
        .map(|(k, re, im)| Harmonic::new(k, re.hypot(im), im.atan2(re)))
        .collect()
}

fn normalize3(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn base_template(class: ExerciseClass) -> Template {
    use ExerciseClass::*;
    let h = Harmonic::new;
    let raw = |period: f64, gravity: [f64; 3], chans: [Vec<Harmonic>; 6]| Template {
        period,
        gravity: normalize3(gravity),
        chans,
    };
    let mut t = match class {
        PEN => raw(
            1.3,
            [0.30, 0.05, 0.95],
            [
                vec![h(1, 1.2, 0.0), h(2, 0.25, 0.9)],
                vec![h(1, 0.9, 1.57), h(3, 0.18, 0.4)],
                vec![h(2, 0.45, 0.2)],
                vec![h(1, 0.9, 0.5)],
                vec![h(1, 1.3, -0.4), h(2, 0.3, 0.1)],
                vec![h(1, 0.6, 1.1)],
            ],
        ),
        ABD => raw(
            2.2,
            [0.0, 0.22, 0.975],
            [
                vec![h(2, 0.35, 0.3)],
                vec![h(1, 1.3, 0.0), h(2, 0.4, 1.2)],
                vec![h(1, 1.0, -1.2), h(3, 0.22, 0.5)],
                vec![h(1, 1.5, 0.2), h(2, 0.35, 1.0)],
                vec![h(2, 0.5, -0.7)],
                vec![h(1, 0.4, 0.9), h(3, 0.15, 0.0)],
            ],
        ),
        FEL => return base_template(ABD).rotate_xy(FEL_ROTATION),
        IR => raw(
            1.7,
            // Zero gravity x: the mirror must not move any channel mean.
            [0.0, -0.18, 0.98],
            [
                // Mirror-group channels (ax, wy, wz) carry one fundamental
                // harmonic each, so negation equals a half-period time shift
                // and univariate window statistics cannot separate IR from
                // ER; the twins differ only in fundamental-frequency
                // cross-channel correlation signs.
                vec![h(1, 0.8, 0.0)],
                vec![h(1, 0.8, 1.0), h(2, 0.3, 0.2)],
                vec![h(1, 0.7, -0.9), h(2, 0.35, 1.3)],
                vec![h(1, 0.8, 0.7), h(2, 0.3, -0.5)],
                vec![h(1, 1.1, 1.55)],
                vec![h(1, 1.4, 0.55)],
            ],
        ),
        ER => return base_template(IR).mirror(&[0, 4, 5]),
        TRAP => raw(
            2.9,
            [-0.15, 0.08, 0.985],
            [
                vec![h(1, 0.4, 0.5), h(2, 0.5, -0.3)],
                vec![h(2, 0.6, 0.8)],
                vec![h(1, 1.4, 0.0), h(2, 0.5, 0.7)],
                vec![h(1, 0.3, 1.2), h(2, 0.5, 0.0)],
                vec![h(1, 0.5, -0.8)],
                vec![h(2, 0.35, 0.4)],
            ],
        ),
        ROW => raw(
            2.0,
            [0.10, 0.28, 0.95],
            [
                vec![h(1, 0.9, -0.5), h(3, 0.3, 0.8)],
                vec![h(1, 0.5, 0.9), h(2, 0.25, -0.2)],
                vec![h(1, 1.1, 0.35), h(2, 0.6, 1.5)],
                vec![h(1, 0.6, -1.0)],
                vec![h(1, 1.0, 0.3), h(2, 0.45, 1.1)],
                vec![h(1, 0.5, 1.4), h(2, 0.2, 0.2)],
            ],
        ),
    };
    t.normalize_power(ACCEL_POWER, GYRO_POWER);
    t
}

/// Apply one subject's perturbation to a class template. Factor draws happen
/// in a fixed order so the stream is stable; with shift 0 every factor is
/// exactly neutral. Returns the perturbed template plus the subject's
/// coordination lag (seconds) between the mirror group and the rest.
fn perturb_template(
    base: &Template,
    cfg: &SynthConfig,
    subject: usize,
    class_idx: usize,
) -> (Template, f64) {
    let shift = cfg.subject_shift_strength;
    let mut rng = stream(cfg.seed, &[tag::SYNTH, SUB_PERTURB, subject as u64, class_idx as u64]);
    let mut uni = |scale: f64| -> f64 { shift * scale * rng.gen_range(-1.0..1.0) };

    let mut out = base.clone();
    out.period = (base.period * (1.0 + uni(0.18)))
        .clamp(cfg.rep_period_range.0, cfg.rep_period_range.1);
    for c in 0..6 {
        for h in &mut out.chans[c] {
            h.amp *= 1.0 + uni(0.25);
            h.phase += uni(std::f64::consts::FRAC_PI_4);
        }
    }
    let wobble = [uni(0.12), uni(0.12), uni(0.06)];
    out.gravity = normalize3([
        base.gravity[0] + wobble[0],
        base.gravity[1] + wobble[1],
        base.gravity[2] + wobble[2],
    ]);
    let lag = uni(LAG_SPAN) * out.period;
    (out, lag)
}

/// Per-recording execution-quality plan: a linear amplitude drift with a slow
/// wobble on top, a small per-rep jitter of the coordination lag, and the
/// occasional short run of badly mis-timed reps. All magnitudes and
/// probabilities scale with subject_shift_strength.
struct DriftPlan {
    slope: f64,
    wobble_amp: f64,
    wobble_phase: f64,
    rep_lags: Vec<f64>,
}

impl DriftPlan {
    fn new(cfg: &SynthConfig, subject: usize, class_idx: usize, side: Side, period: f64) -> Self {
        let shift = cfg.subject_shift_strength;
        let mut rng = stream(
            cfg.seed,
            &[tag::SYNTH, SUB_DRIFT, subject as u64, class_idx as u64, side as u64],
        );
        let slope = shift * DRIFT_SPAN * rng.gen_range(-1.0..1.0);
        let wobble_amp = shift * DRIFT_WOBBLE * rng.gen_range(0.25..1.0);
        let wobble_phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let mut rep_lags = Vec::with_capacity(cfg.reps_per_set);
        let mut run_left = 0usize;
        let mut run_lag = 0.0;
        for _ in 0..cfg.reps_per_set {
            let wobble = shift * REP_WOBBLE * rng.gen_range(-1.0..1.0) * period;
            let trigger = rng.gen_range(0.0..1.0) < shift * FLIP_START;
            if run_left == 0 && trigger {
                run_left = rng.gen_range(2..=3usize);
                let magnitude = rng.gen_range(LURCH_SPAN.0..LURCH_SPAN.1);
                let sign = if rng.gen_range(0.0..1.0) < 0.5 { -1.0 } else { 1.0 };
                run_lag = sign * magnitude * period;
            }
            let lurching = run_left > 0;
            run_left = run_left.saturating_sub(1);
            rep_lags.push(wobble + if lurching { run_lag } else { 0.0 });
        }
        DriftPlan { slope, wobble_amp, wobble_phase, rep_lags }
    }

    /// Amplitude envelope at `t` seconds into an active span of
    /// `active_seconds`; mean ≈ 1 so power normalization stays honest.
    fn envelope(&self, t: f64, active_seconds: f64) -> f64 {
        let frac = if active_seconds > 0.0 { t / active_seconds } else { 0.0 };
        1.0 + self.slope * (frac - 0.5)
            + self.wobble_amp
                * (std::f64::consts::TAU * DRIFT_WOBBLE_HZ * t + self.wobble_phase).sin()
    }

    /// Coordination-lag jitter for the rep containing `t`.
    fn rep_lag(&self, t: f64, period: f64) -> f64 {
        if self.rep_lags.is_empty() {
            return 0.0;
        }
        let rep = ((t / period) as usize).min(self.rep_lags.len() - 1);
        self.rep_lags[rep]
    }
}

fn synth_recording(
    cfg: &SynthConfig,
    subject: usize,
    class: ExerciseClass,
    side: Side,
) -> Recording {
    let class_idx = class.index();
    let (template, lag) = perturb_template(&base_template(class), cfg, subject, class_idx);
    let drift = DriftPlan::new(cfg, subject, class_idx, side, template.period);
    let lag_group: &[usize] = match side {
        Side::Right => &MIRROR_GROUP,
        Side::Left => &MIRROR_GROUP_LEFT,
    };

    let n_rest = (cfg.rest_padding_seconds * cfg.fs_hz).round() as usize;
    let n_active = (cfg.reps_per_set as f64 * template.period * cfg.fs_hz).round() as usize;
    let n_total = n_active + 2 * n_rest;
    let active_seconds = n_active as f64 / cfg.fs_hz;

    let mut channels: Vec<Vec<f64>> = vec![vec![0.0; n_total]; 6];
    let active = Interval::new(n_rest, n_rest + n_active);

    for (c, chan) in channels.iter_mut().enumerate() {
        let lagged = lag_group.contains(&c);
        for (i, slot) in chan.iter_mut().enumerate() {
            let t_abs = i as f64 / cfg.fs_hz;
            *slot = if i >= active.start && i < active.end {
                let t = (i - active.start) as f64 / cfg.fs_hz;
                let t_c = if lagged { t + lag + drift.rep_lag(t, template.period) } else { t };
                drift.envelope(t, active_seconds) * template.osc(c, t_c)
                    + template.gravity_term(c)
            } else {
                // Rest: gravity plus a gentle horizontal sway, gyro silent.
                match c {
                    0 => SWAY_AMP * (std::f64::consts::TAU * 0.35 * t_abs).sin(),
                    1 => 0.75 * SWAY_AMP * (std::f64::consts::TAU * 0.27 * t_abs).sin(),
                    2 => 1.0,
                    _ => 0.0,
                }
            };
        }
    }

    if side == Side::Left {
        for &c in &[0usize, 3] {
            for v in &mut channels[c] {
                *v = -*v;
            }
        }
    }

    if cfg.noise_std > 0.0 {
        let normal = Normal::new(0.0, cfg.noise_std).unwrap();
        for (c, chan) in channels.iter_mut().enumerate() {
            let mut rng = stream(
                cfg.seed,
                &[
                    tag::SYNTH,
                    SUB_NOISE,
                    subject as u64,
                    class_idx as u64,
                    side as u64,
                    c as u64,
                ],
            );
            for v in chan.iter_mut() {
                *v += normal.sample(&mut rng);
            }
        }
    }

    let samples = (0..n_total)
        .map(|i| SensorSample {
            t: i as f64 / cfg.fs_hz,
            accel: [channels[0][i], channels[1][i], channels[2][i]],
            gyro: [channels[3][i], channels[4][i], channels[5][i]],
        })
        .collect();

    Recording {
        id: format!("s{subject:02}_{class}_{side}"),
        subject_id: format!("s{subject:02}"),
        exercise: class,
        side,
        samples,
        annotation: Some(active),
    }
}

/// Generate the full dataset: one recording per (subject, class, side), in
/// subject-major order, plus a matching manifest. Recordings carry the true
/// active interval as their annotation.
pub fn generate_dataset(cfg: &SynthConfig) -> Result<(Vec<Recording>, Manifest)> {
    cfg.validate()?;
    let mut slots = Vec::new();
    for subject in 1..=cfg.n_subjects {
        for class in ExerciseClass::ALL {
            for side in [Side::Left, Side::Right] {
                slots.push((subject, class, side));
            }
        }
    }
    let recordings: Vec<Recording> = slots
        .par_iter()
        .map(|&(subject, class, side)| synth_recording(cfg, subject, class, side))
        .collect();
    let files = recordings
        .iter()
        .map(|r| ManifestEntry {
            path: format!("data/{}.csv", r.id),
            subject: r.subject_id.clone(),
            exercise: r.exercise,
            side: r.side,
        })
        .collect();
    let manifest = Manifest {
        fs_hz: cfg.fs_hz,
        units: Units::default(),
        files,
    };
    Ok((recordings, manifest))
}

/// Mean per-sample accelerometer energy |a|² over the active interval and
/// over the rest padding. Used by tests and tuning tools.
pub fn energy_contrast(rec: &Recording) -> (f64, f64) {
    let interval = rec.annotation.expect("recording must carry an annotation");
    let (mut active, mut rest) = ((0.0, 0usize), (0.0, 0usize));
    for (i, s) in rec.samples.iter().enumerate() {
        let e = s.accel.iter().map(|v| v * v).sum::<f64>();
        if i >= interval.start && i < interval.end {
            active.0 += e;
            active.1 += 1;
        } else {
            rest.0 += e;
            rest.1 += 1;
        }
    }
    (active.0 / active.1 as f64, rest.0 / rest.1.max(1) as f64)
}
