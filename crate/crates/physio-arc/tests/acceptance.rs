//! Acceptance suite: twelve numbered criteria covering the whole chain, from
//! feature identities through oracle cross-checks to the end-to-end seeded
//! replication. Every test prints exactly one `criterion N: PASS/FAIL` line
//! (visible with `--nocapture`); a FAIL line panics with the same detail.

use std::sync::OnceLock;
use std::time::Instant;

use rand::Rng;

use physio_arc::data::{ExerciseClass, Interval, Recording, SensorSample, Side};
use physio_arc::eval::{
    cross_validate, plan_subject_folds_of, plan_temporal_folds_of, sweep, ClassifierKind,
    FoldKind, PipelineSpec, SweepAxis, WindowGeometry,
};
use physio_arc::features::{
    extract_features, featurize_recordings, pearson, spectral_energy, univariate_features,
    N_FEATURES, N_PAIRS, N_STATS, N_VECTORS,
};
use physio_arc::knn::{knn_fit, knn_predict};
use physio_arc::nn::check::max_rel_err;
use physio_arc::nn::layers::{
    conv1d_backward, conv1d_forward, conv_out_len, dense_softmax_xent, lstm_backward,
    lstm_forward, maxpool1d_backward, maxpool1d_forward, relu_backward, relu_forward,
};
use physio_arc::nn::{crnn_predict, crnn_train, init_params, loss_and_gradients, CrnnConfig};
use physio_arc::report::{stored_report_json, StoredReport};
use physio_arc::rng::stream;
use physio_arc::segment::{segment, window_count, SegmentationSpec, CHANNELS};
use physio_arc::svm::{pair_decision, svc_fit, svc_predict, SvcParams};
use physio_arc::synth::{generate_dataset, SynthConfig};
use physio_arc::trees::{fit_forest, fit_tree, gini_importance, predict_forest, ForestMode,
    ForestParams};
use physio_arc::WindowTensor;

fn verdict(n: usize, ok: bool, detail: &str) {
    if ok {
        println!("criterion {n}: PASS ({detail})");
    } else {
        println!("criterion {n}: FAIL ({detail})");
        panic!("criterion {n} failed: {detail}");
    }
}

fn randv(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

/// N windows of random data as a bare tensor (provenance-free).
fn random_tensor(n: usize, len: usize, seed: u64) -> WindowTensor {
    let mut rng = stream(seed, &[201]);
    let classes = [ExerciseClass::PEN, ExerciseClass::ABD, ExerciseClass::FEL];
    WindowTensor {
        data: randv(&mut rng, n * len * CHANNELS, 1.0),
        n,
        len,
        labels: (0..n).map(|i| classes[i % classes.len()]).collect(),
        meta: (0..n)
            .map(|i| physio_arc::segment::WindowMeta { recording_index: 0, start_sample: i })
            .collect(),
        recordings: vec![],
        spec: SegmentationSpec::new(len as f64 / 50.0, 0.0, 50.0),
    }
}

// ---------------------------------------------------------------- criterion 1

#[test]
fn criterion_01_feature_count_identity() {
    let mut ok = N_VECTORS * N_STATS + N_PAIRS + 1 == 133 && N_FEATURES == 133;
    let mut detail = format!("8x13 + 28 + 1 = {}", N_VECTORS * N_STATS + N_PAIRS + 1);
    for len in [2, 5, 25, 100, 333] {
        let fm = extract_features(&random_tensor(3, len, 300 + len as u64)).unwrap();
        if fm.d != 133 || fm.names.len() != 133 || fm.values.len() != 3 * 133 {
            ok = false;
            detail = format!("window length {len} produced {} columns", fm.d);
            break;
        }
    }
    verdict(1, ok, &detail);
}

// ---------------------------------------------------------------- criterion 2

/// O(L²) discrete Fourier transform energy: (1/L)·Σ_k |X_k|².
fn dft_energy_naive(x: &[f64]) -> f64 {
    let l = x.len();
    let mut total = 0.0;
    for k in 0..l {
        let (mut re, mut im) = (0.0, 0.0);
        for (t, &v) in x.iter().enumerate() {
            let arg = -std::f64::consts::TAU * (k * t) as f64 / l as f64;
            re += v * arg.cos();
            im += v * arg.sin();
        }
        total += re * re + im * im;
    }
    total / l as f64
}

#[test]
fn criterion_02_parseval_oracle() {
    let mut rng = stream(2, &[2]);
    let mut worst_time = 0.0f64;
    let mut worst_dft = 0.0f64;
    for i in 0..1000 {
        let len = rng.gen_range(2..=64usize);
        let x = randv(&mut rng, len, 2.0);
        let xi = spectral_energy(&x);
        let direct: f64 = x.iter().map(|v| v * v).sum();
        worst_time = worst_time.max((xi - direct).abs() / direct.abs().max(1e-300));
        // The O(L²) DFT is slow; sample it on a fifth of the vectors.
        if i % 5 == 0 {
            let naive = dft_energy_naive(&x);
            worst_dft = worst_dft.max((xi - naive).abs() / naive.abs().max(1e-300));
        }
    }
    verdict(
        2,
        worst_time < 1e-9 && worst_dft < 1e-9,
        &format!("max rel err: {worst_time:.2e} vs Σx², {worst_dft:.2e} vs naive DFT"),
    );
}

// ---------------------------------------------------------------- criterion 3

/// The thirteen univariate window features, restated from their definitions.
fn univariate_oracle(x: &[f64]) -> [f64; 13] {
    let l = x.len() as f64;
    let mean = x.iter().sum::<f64>() / l;
    let max = x.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let min = x.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let (var, std, skew, kurt) = if max == min {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        let m2 = x.iter().map(|&v| (v - mean).powi(2)).sum::<f64>() / l;
        let m3 = x.iter().map(|&v| (v - mean).powi(3)).sum::<f64>() / l;
        let m4 = x.iter().map(|&v| (v - mean).powi(4)).sum::<f64>() / l;
        let std = m2.sqrt();
        (m2, std, m3 / std.powi(3), m4 / (m2 * m2) - 3.0)
    };
    let mut zeta = 0.0;
    for pair in x.windows(2) {
        if ((pair[0] - mean) >= 0.0) != ((pair[1] - mean) >= 0.0) {
            zeta += 1.0;
        }
    }
    let xi = x.iter().map(|&v| v * v).sum::<f64>();
    let mut hist = [0.0f64; 4];
    if max == min {
        hist[0] = l;
    } else {
        for &v in x {
            let bin = (((v - min) / ((max - min) / 4.0)) as usize).min(3);
            hist[bin] += 1.0;
        }
    }
    [mean, var, std, max, min, skew, kurt, zeta, xi, hist[0], hist[1], hist[2], hist[3]]
}

fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
    let l = x.len() as f64;
    let mx = x.iter().sum::<f64>() / l;
    let my = y.iter().sum::<f64>() / l;
    let cov = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum::<f64>() / l;
    let vx = x.iter().map(|&a| (a - mx).powi(2)).sum::<f64>() / l;
    let vy = y.iter().map(|&b| (b - my).powi(2)).sum::<f64>() / l;
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx.sqrt() * vy.sqrt())
    }
}

#[test]
fn criterion_03_feature_definition_oracles() {
    let mut rng = stream(3, &[3]);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let len = rng.gen_range(2..=80usize);
        let x = randv(&mut rng, len, 3.0);
        let y = randv(&mut rng, len, 3.0);
        let got = univariate_features(&x).unwrap();
        let want = univariate_oracle(&x);
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs() / g.abs().max(w.abs()).max(1.0));
        }
        let rg = pearson(&x, &y).unwrap();
        let rw = pearson_oracle(&x, &y);
        worst = worst.max((rg - rw).abs() / rg.abs().max(rw.abs()).max(1.0));
    }
    // Degenerate inputs: constant, and constant-vs-varying correlation.
    let c = vec![2.5; 16];
    let got = univariate_features(&c).unwrap();
    let want = univariate_oracle(&c);
    let degenerate_ok = got == want && pearson(&c, &randv(&mut rng, 16, 1.0)).unwrap() == 0.0;
    verdict(
        3,
        worst < 1e-9 && degenerate_ok,
        &format!("max rel err {worst:.2e} over 1000 windows; degenerate cases exact"),
    );
}

// ---------------------------------------------------------------- criterion 4

#[test]
fn criterion_04_segmentation_oracle() {
    let mut rng = stream(4, &[4]);
    let fs = 10.0;
    let mut checked_windows = 0usize;
    for trial in 0..500 {
        let l = rng.gen_range(2..=40usize);
        let s = rng.gen_range(1..=l);
        // Cover the degenerate M < L case on a tenth of the trials.
        let m = if trial % 10 == 0 {
            rng.gen_range(0..l)
        } else {
            rng.gen_range(l..=l + 350)
        };
        let pad = rng.gen_range(0..20usize);
        let total = pad + m + rng.gen_range(0..20usize);
        let samples: Vec<SensorSample> = (0..total)
            .map(|t| SensorSample {
                t: t as f64 / fs,
                accel: [rng.gen(), rng.gen(), rng.gen()],
                gyro: [rng.gen(), rng.gen(), rng.gen()],
            })
            .collect();
        let rec = Recording {
            id: format!("trial{trial}"),
            subject_id: "s01".into(),
            exercise: ExerciseClass::PEN,
            side: Side::Right,
            samples,
            annotation: Some(Interval::new(pad, pad + m)),
        };
        let spec = SegmentationSpec::new(l as f64 / fs, 1.0 - s as f64 / l as f64, fs);
        assert_eq!(spec.window_len(), l, "window length rounding broke the spec");
        assert_eq!(spec.stride(), s, "stride rounding broke the spec");
        let tensor = segment(std::slice::from_ref(&rec), &spec).unwrap();
        let expected = if m >= l { (m - l) / s + 1 } else { 0 };
        assert_eq!(window_count(m, l, s), expected, "count formula (M={m}, L={l}, s={s})");
        assert_eq!(tensor.n, expected, "tensor count (M={m}, L={l}, s={s})");
        for w in 0..tensor.n {
            let start = pad + w * s;
            let window = tensor.window(w);
            for t in 0..l {
                let sample = &rec.samples[start + t];
                let got = &window[t * CHANNELS..(t + 1) * CHANNELS];
                assert_eq!(&got[..3], &sample.accel, "accel mismatch");
                assert_eq!(&got[3..], &sample.gyro, "gyro mismatch");
            }
            checked_windows += 1;
        }
    }
    verdict(4, true, &format!("500 (M, L, s) triples, {checked_windows} windows bit-exact"));
}

// ---------------------------------------------------------------- criterion 5

#[test]
fn criterion_05_fold_protocol_invariants() {
    let cfg = SynthConfig::default();
    let (recordings, _) = generate_dataset(&cfg).unwrap();
    let seg = SegmentationSpec::new(2.0, 0.75, cfg.fs_hz);
    let tensor = segment(&recordings, &seg).unwrap();
    let geom = WindowGeometry::of_tensor(&tensor);

    // Temporal: within each recording, validation window ranges of different
    // folds must not overlap in time.
    let temporal = plan_temporal_folds_of(geom, 5).unwrap();
    let l = temporal.window_len;
    let mut per_rec: Vec<Vec<(usize, usize)>> = vec![Vec::new(); tensor.recordings.len()];
    for (fold, rows) in temporal.folds.iter().enumerate() {
        for &row in rows {
            let meta = &tensor.meta[row];
            per_rec[meta.recording_index].push((meta.start_sample, fold));
        }
    }
    let mut temporal_ok = true;
    for ranges in &mut per_rec {
        ranges.sort_unstable();
        for pair in ranges.windows(2) {
            if pair[0].1 != pair[1].1 && pair[1].0 < pair[0].0 + l {
                temporal_ok = false;
            }
        }
    }

    // Subject: 5 folds × 4 unique subjects, disjoint, covering all 20.
    let subject = plan_subject_folds_of(geom, 5, cfg.seed).unwrap();
    let mut seen = std::collections::BTreeSet::new();
    let mut sizes = Vec::new();
    let mut disjoint = true;
    for rows in &subject.folds {
        let fold_subjects: std::collections::BTreeSet<&str> = rows
            .iter()
            .map(|&r| tensor.recordings[tensor.meta[r].recording_index].subject_id.as_str())
            .collect();
        sizes.push(fold_subjects.len());
        for s in fold_subjects {
            if !seen.insert(s) {
                disjoint = false;
            }
        }
    }
    let subject_ok = disjoint && seen.len() == 20 && sizes.iter().all(|&n| n == 4);
    verdict(
        5,
        temporal_ok && subject_ok,
        &format!(
            "temporal ranges disjoint: {temporal_ok}; subject folds {sizes:?} over {} subjects",
            seen.len()
        ),
    );
}

// ---------------------------------------------------------------- criterion 6

#[test]
fn criterion_06_tree_forest_oracles() {
    let mut rng = stream(6, &[6]);
    let (n, d, n_classes) = (240, 8, 3);
    let x = randv(&mut rng, n * d, 2.0);
    let y: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n_classes)).collect();
    let params = ForestParams::new(ForestMode::RandomForest, 25, 0.5, 0xF0);
    let model = fit_forest(&x, &y, d, n_classes, &params).unwrap();
    let (labels, probs) = predict_forest(&model, &x, d).unwrap();

    // Re-aggregate per tree: average of normalized leaf counts, ties low.
    let mut agg_ok = true;
    for i in 0..n {
        let row = &x[i * d..(i + 1) * d];
        let mut acc = vec![0.0f64; n_classes];
        for tree in &model.trees {
            let counts = tree.leaf_counts(row);
            let total: u32 = counts.iter().sum();
            for (a, &c) in acc.iter_mut().zip(counts) {
                *a += c as f64 / total as f64;
            }
        }
        let t = model.trees.len() as f64;
        let dist: Vec<f64> = acc.into_iter().map(|v| v / t).collect();
        let mut best = 0usize;
        for (c, &v) in dist.iter().enumerate().skip(1) {
            if v > dist[best] {
                best = c;
            }
        }
        if labels[i] != best || probs[i * n_classes..(i + 1) * n_classes] != dist[..] {
            agg_ok = false;
        }
    }

    // Gini importances: non-negative, sum to 1; a constant column scores 0.
    let mut xc = Vec::with_capacity(n * (d + 1));
    for row in x.chunks(d) {
        xc.push(7.25);
        xc.extend_from_slice(row);
    }
    let model_c = fit_forest(&xc, &y, d + 1, n_classes, &params).unwrap();
    let imp = gini_importance(&model_c).unwrap();
    let sum: f64 = imp.iter().sum();
    let gini_ok =
        imp.iter().all(|&v| v >= 0.0) && (sum - 1.0).abs() < 1e-9 && imp[0] == 0.0;

    // XOR needs two stacked splits; a single tree must fit it exactly.
    let xor_x = vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0];
    let xor_y = vec![0usize, 1, 1, 0];
    let tree = fit_tree(&xor_x, &xor_y, 2, 2, ForestMode::RandomForest, 1.0, 3).unwrap();
    let xor_ok = xor_x.chunks(2).zip(&xor_y).all(|(row, &label)| tree.predict(row) == label);

    verdict(
        6,
        agg_ok && gini_ok && xor_ok,
        &format!(
            "re-aggregation exact: {agg_ok}; importances sum {sum:.12}, constant col {}; XOR: {xor_ok}",
            imp[0]
        ),
    );
}

// ---------------------------------------------------------------- criterion 7

#[test]
fn criterion_07_knn_identity_and_oracle() {
    let mut rng = stream(7, &[7]);
    let (n, d, n_classes) = (500, 20, 4);
    let x = randv(&mut rng, n * d, 1.0);
    let y: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n_classes)).collect();

    let model1 = knn_fit(&x, &y, d, n_classes, 1).unwrap();
    let train_pred = knn_predict(&model1, &x, d).unwrap();
    let identity_ok = train_pred == y;

    // Sort-based oracle: full argsort by (squared distance, index), majority
    // vote among the first k with ties to the lowest class.
    let queries = randv(&mut rng, 80 * d, 1.0);
    let mut oracle_ok = true;
    for k in [1, 5, 17] {
        let model = knn_fit(&x, &y, d, n_classes, k).unwrap();
        let pred = knn_predict(&model, &queries, d).unwrap();
        for (qi, q) in queries.chunks(d).enumerate() {
            let mut ranked: Vec<(f64, usize)> = x
                .chunks(d)
                .enumerate()
                .map(|(i, row)| {
                    (row.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i)
                })
                .collect();
            ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut counts = vec![0u32; n_classes];
            for &(_, i) in &ranked[..k] {
                counts[y[i]] += 1;
            }
            let mut best = 0usize;
            for (c, &v) in counts.iter().enumerate().skip(1) {
                if v > counts[best] {
                    best = c;
                }
            }
            if pred[qi] != best {
                oracle_ok = false;
            }
        }
    }
    verdict(
        7,
        identity_ok && oracle_ok,
        &format!("k=1 training identity: {identity_ok}; sort oracle over 80×3 queries: {oracle_ok}"),
    );
}

// ---------------------------------------------------------------- criterion 8

#[test]
fn criterion_08_svm_optimality() {
    let mut rng = stream(8, &[8]);
    let (per_class, d, n_classes) = (30, 3, 3);
    let centers = [[0.0, 0.0, 0.0], [8.0, 0.0, 4.0], [0.0, 8.0, -4.0]];
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per_class {
            for &m in center {
                x.push(m + rng.gen_range(-0.5..0.5));
            }
            y.push(c);
        }
    }
    let params = SvcParams { c: 1.0, gamma: 0.1, tol: 1e-4, max_iter: None };
    let model = svc_fit(&x, &y, d, n_classes, &params).unwrap();
    let separable_ok = svc_predict(&model, &x, d).unwrap() == y;

    let mut max_kkt = 0.0f64;
    let mut max_box = 0.0f64;
    let mut max_eq = 0.0f64;
    let mut max_decision_err = 0.0f64;
    for machine in &model.pairs {
        // Match stored support vectors back to training rows bit-exactly.
        let sv_rows: Vec<usize> = machine
            .sv
            .chunks(d)
            .map(|sv| {
                (0..x.len() / d)
                    .find(|&i| &x[i * d..(i + 1) * d] == sv)
                    .expect("support vector not found in training data")
            })
            .collect();
        for &a in &machine.alpha {
            max_box = max_box.max((-a).max(a - params.c));
        }
        max_eq = max_eq
            .max(machine.alpha.iter().zip(&machine.sv_y).map(|(a, yi)| a * yi).sum::<f64>().abs());

        for (i, &label) in y.iter().enumerate() {
            if label != machine.class_a && label != machine.class_b {
                continue;
            }
            let yi = if label == machine.class_a { 1.0 } else { -1.0 };
            let q = &x[i * d..(i + 1) * d];
            let f = pair_decision(machine, params.gamma, q);
            // Independent kernel-expansion oracle.
            let mut oracle = machine.b;
            for (j, sv) in machine.sv.chunks(d).enumerate() {
                let sq: f64 = sv.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
                oracle += machine.alpha[j] * machine.sv_y[j] * (-params.gamma * sq).exp();
            }
            max_decision_err = max_decision_err.max((f - oracle).abs());

            let alpha = sv_rows
                .iter()
                .position(|&r| r == i)
                .map_or(0.0, |j| machine.alpha[j]);
            let margin = yi * f;
            let viol = if alpha <= 0.0 {
                (1.0 - margin).max(0.0)
            } else if alpha >= params.c {
                (margin - 1.0).max(0.0)
            } else {
                (margin - 1.0).abs()
            };
            max_kkt = max_kkt.max(viol);
        }
    }
    verdict(
        8,
        separable_ok
            && max_kkt < 1e-3
            && max_box < 1e-6
            && max_eq < 1e-6
            && max_decision_err < 1e-9,
        &format!(
            "blobs exact: {separable_ok}; KKT {max_kkt:.2e}, box {max_box:.2e}, Σαy {max_eq:.2e}, decision {max_decision_err:.2e}"
        ),
    );
}

// ---------------------------------------------------------------- criterion 9

#[test]
fn criterion_09_gradient_checks() {
    let mut rng = stream(9, &[9]);
    let mut failures = Vec::new();

    // conv1d (smooth linear map): 1e-6.
    {
        let (t, c_in, k, c_out, stride) = (9, 2, 3, 4, 2);
        let x = randv(&mut rng, t * c_in, 1.0);
        let w = randv(&mut rng, k * c_in * c_out, 0.5);
        let b = randv(&mut rng, c_out, 0.5);
        let t_out = conv_out_len(t, k, stride).unwrap();
        let coeff = randv(&mut rng, t_out * c_out, 1.0);
        let loss = |x: &[f64], w: &[f64], b: &[f64]| -> f64 {
            conv1d_forward(x, t, c_in, w, k, c_out, b, stride)
                .unwrap()
                .iter()
                .zip(&coeff)
                .map(|(o, c)| o * c)
                .sum()
        };
        let (gx, gw, gb) = conv1d_backward(&x, t, c_in, &w, k, c_out, stride, &coeff);
        let e = max_rel_err(&x, &gx, 1e-5, |p| loss(p, &w, &b))
            .max(max_rel_err(&w, &gw, 1e-5, |p| loss(&x, p, &b)))
            .max(max_rel_err(&b, &gb, 1e-5, |p| loss(&x, &w, p)));
        if e >= 1e-6 {
            failures.push(format!("conv1d {e:.2e}"));
        }
    }

    // relu (kinked; inputs kept away from 0): 1e-5.
    {
        let x: Vec<f64> =
            (0..40).map(|_| rng.gen_range(0.2..1.0) * if rng.gen() { 1.0 } else { -1.0 }).collect();
        let coeff = randv(&mut rng, 40, 1.0);
        let loss = |p: &[f64]| -> f64 {
            relu_forward(p).iter().zip(&coeff).map(|(o, c)| o * c).sum()
        };
        let g_out: Vec<f64> = coeff.clone();
        let gx = relu_backward(&x, &g_out);
        let e = max_rel_err(&x, &gx, 1e-6, loss);
        if e >= 1e-5 {
            failures.push(format!("relu {e:.2e}"));
        }
    }

    // maxpool (kinked; distinct values keep argmax stable): 1e-5.
    {
        let (t, c) = (10, 3);
        let x: Vec<f64> = (0..t * c).map(|i| i as f64 * 0.37 % 5.0 + 0.01).collect();
        let (out, arg) = maxpool1d_forward(&x, t, c).unwrap();
        let coeff = randv(&mut rng, out.len(), 1.0);
        let loss = |p: &[f64]| -> f64 {
            let (o, _) = maxpool1d_forward(p, t, c).unwrap();
            o.iter().zip(&coeff).map(|(a, b)| a * b).sum()
        };
        let gx = maxpool1d_backward(&arg, &coeff, t, c);
        let e = max_rel_err(&x, &gx, 1e-6, loss);
        if e >= 1e-5 {
            failures.push(format!("maxpool {e:.2e}"));
        }
    }

    // lstm (hard-sigmoid gates are piecewise): 1e-5.
    {
        let (t_len, c_in, units) = (6, 3, 4);
        let x = randv(&mut rng, t_len * c_in, 0.6);
        let w = randv(&mut rng, 4 * units * c_in, 0.4);
        let r = randv(&mut rng, 4 * units * units, 0.4);
        let b = randv(&mut rng, 4 * units, 0.2);
        let coeff = randv(&mut rng, t_len * units, 1.0);
        let loss = |x: &[f64], w: &[f64], r: &[f64], b: &[f64]| -> f64 {
            let cache = lstm_forward(x, t_len, c_in, w, r, b, units).unwrap();
            cache.h.iter().zip(&coeff).map(|(h, c)| h * c).sum()
        };
        let cache = lstm_forward(&x, t_len, c_in, &w, &r, &b, units).unwrap();
        let grads = lstm_backward(&cache, &w, &r, &coeff);
        let e = max_rel_err(&x, &grads.x, 1e-5, |p| loss(p, &w, &r, &b))
            .max(max_rel_err(&w, &grads.w, 1e-5, |p| loss(&x, p, &r, &b)))
            .max(max_rel_err(&r, &grads.r, 1e-5, |p| loss(&x, &w, p, &b)))
            .max(max_rel_err(&b, &grads.b, 1e-5, |p| loss(&x, &w, &r, p)));
        if e >= 1e-5 {
            failures.push(format!("lstm {e:.2e}"));
        }
    }

    // dense + softmax + cross-entropy (smooth): 1e-6.
    {
        let (n, u, c_out) = (5, 4, 3);
        let h = randv(&mut rng, n * u, 1.0);
        let w = randv(&mut rng, c_out * u, 0.5);
        let b = randv(&mut rng, c_out, 0.2);
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c_out)).collect();
        let lambda = 0.01;
        let loss = |h: &[f64], w: &[f64], b: &[f64]| -> f64 {
            dense_softmax_xent(h, n, u, w, b, c_out, &labels, lambda).0
        };
        let (_, grads) = dense_softmax_xent(&h, n, u, &w, &b, c_out, &labels, lambda);
        let e = max_rel_err(&h, &grads.h, 1e-5, |p| loss(p, &w, &b))
            .max(max_rel_err(&w, &grads.w, 1e-5, |p| loss(&h, p, &b)))
            .max(max_rel_err(&b, &grads.b, 1e-5, |p| loss(&h, &w, p)));
        if e >= 1e-6 {
            failures.push(format!("dense {e:.2e}"));
        }
    }

    // Composed network loss with 1/√fan-in initialization: 1e-5.
    {
        let cfg = CrnnConfig {
            conv_filters: [3, 4],
            kernel_size: 3,
            lstm_units: [3, 2],
            dropout: 0.0,
            epochs: 1,
            batch_size: 4,
            seed: 11,
            n_classes: 3,
            ..CrnnConfig::default()
        };
        let len = 16;
        let n = 5;
        let x = randv(&mut rng, n * len * CHANNELS, 0.8);
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let params = init_params(&cfg);
        let (_, grads) = loss_and_gradients(&cfg, len, &params, &x, &labels).unwrap();
        let e = max_rel_err(&params, &grads, 1e-5, |p| {
            loss_and_gradients(&cfg, len, p, &x, &labels).unwrap().0
        });
        if e >= 1e-5 {
            failures.push(format!("composed {e:.2e}"));
        }
    }

    verdict(
        9,
        failures.is_empty(),
        &if failures.is_empty() {
            "conv, relu, maxpool, lstm, dense, composed loss all within tolerance".to_string()
        } else {
            failures.join(", ")
        },
    );
}

// ----------------------------------------------------- criteria 10 and 11

struct E2e {
    reports: Vec<StoredReport>,
    json: Vec<String>,
    curve: Vec<f64>,
    seconds: f64,
}

/// The full produce path for the seeded default dataset: six report JSONs
/// (RF 150, k-NN k=1, k-NN k=30; each under both fold protocols).
fn produce_reports() -> Vec<StoredReport> {
    let cfg = SynthConfig::default();
    let (recordings, _) = generate_dataset(&cfg).unwrap();
    let seg = SegmentationSpec::new(2.0, 0.75, cfg.fs_hz);
    let features = featurize_recordings(&recordings, &seg).unwrap();
    let geom = WindowGeometry::of_features(&features).unwrap();
    let temporal = plan_temporal_folds_of(geom, 5).unwrap();
    let subject = plan_subject_folds_of(geom, 5, cfg.seed).unwrap();
    let mut out = Vec::new();
    for classifier in [
        ClassifierKind::RandomForest { n_estimators: 150, max_features_fraction: 0.10 },
        ClassifierKind::Knn { k: 1 },
        ClassifierKind::Knn { k: 30 },
    ] {
        for plan in [&temporal, &subject] {
            let spec = PipelineSpec { classifier: classifier.clone(), ..PipelineSpec::default() };
            out.push(StoredReport::from(&cross_validate(&features, plan, &spec).unwrap()));
        }
    }
    out
}

fn e2e() -> &'static E2e {
    static E2E: OnceLock<E2e> = OnceLock::new();
    E2E.get_or_init(|| {
        let start = Instant::now();
        let reports = produce_reports();
        let json = reports.iter().map(|r| stored_report_json(r).unwrap()).collect();

        // Overlap sweep on a lighter forest; the trend is the subject here.
        let cfg = SynthConfig::default();
        let (recordings, _) = generate_dataset(&cfg).unwrap();
        let base = SegmentationSpec::new(2.0, 0.0, cfg.fs_hz);
        let spec = PipelineSpec {
            classifier: ClassifierKind::RandomForest {
                n_estimators: 60,
                max_features_fraction: 0.10,
            },
            ranking_trees: 60,
            ..PipelineSpec::default()
        };
        let curve = sweep(
            &recordings,
            &base,
            &spec,
            SweepAxis::Overlap,
            &[0.0, 0.5, 0.75, 0.9, 0.95],
            FoldKind::Temporal,
            5,
        )
        .unwrap()
        .points
        .iter()
        .map(|p| p.mean_validation_accuracy)
        .collect();

        E2e { reports, json, curve, seconds: start.elapsed().as_secs_f64() }
    })
}

#[test]
fn criterion_10_end_to_end_replication() {
    let e = e2e();
    let [rf_t, rf_s, k1_t, k1_s, k30_t, k30_s] = [
        e.reports[0].validation_accuracy_mean,
        e.reports[1].validation_accuracy_mean,
        e.reports[2].validation_accuracy_mean,
        e.reports[3].validation_accuracy_mean,
        e.reports[4].validation_accuracy_mean,
        e.reports[5].validation_accuracy_mean,
    ];
    let a = rf_t >= 0.95;
    let b = rf_t - rf_s >= 0.02;
    let c = k1_t > k30_t && k30_s > k1_s;
    let d = e
        .curve
        .iter()
        .enumerate()
        .all(|(j, &aj)| e.curve[..j].iter().all(|&ai| aj >= ai - 0.01));

    // Largest off-diagonal confusion pair of the subject-protocol forest.
    let nc = e.reports[1].n_classes;
    let conf = &e.reports[1].confusion;
    let mut best_pair = (0, 0);
    let mut best = 0u64;
    for i in 0..nc {
        for j in (i + 1)..nc {
            let v = conf[i * nc + j] + conf[j * nc + i];
            if v > best {
                best = v;
                best_pair = (i, j);
            }
        }
    }
    let ir = ExerciseClass::IR.index();
    let er = ExerciseClass::ER.index();
    let ee = best_pair == (ir.min(er), ir.max(er)) && best > 0;

    verdict(
        10,
        a && b && c && d && ee,
        &format!(
            "(a) RF temporal {rf_t:.4}; (b) gap {:.4}; (c) k-NN margins T {:+.4} / S {:+.4}; \
             (d) sweep {:?}; (e) top pair {:?}×{}; {:.0}s",
            rf_t - rf_s,
            k1_t - k30_t,
            k30_s - k1_s,
            e.curve.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(),
            best_pair,
            best,
            e.seconds
        ),
    );
}

#[test]
fn criterion_11_determinism() {
    let first = &e2e().json;
    let second: Vec<String> = produce_reports()
        .iter()
        .map(|r| stored_report_json(r).unwrap())
        .collect();
    let ok = *first == second;
    verdict(
        11,
        ok,
        &format!("{} report JSONs byte-identical across independent runs", second.len()),
    );
}

// --------------------------------------------------------------- criterion 12

/// Two-class toy problem: low- vs high-frequency sine on channel 0.
fn toy_two_class(n_per_class: usize, len: usize, seed: u64) -> WindowTensor {
    let mut rng = stream(seed, &[12]);
    let mut windows = Vec::new();
    let mut labels = Vec::new();
    for class in 0..2usize {
        for _ in 0..n_per_class {
            let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let freq = if class == 0 { 1.0 } else { 4.0 };
            let mut w = Vec::with_capacity(len * CHANNELS);
            for t in 0..len {
                let arg = freq * std::f64::consts::TAU * t as f64 / len as f64 + phase;
                w.push(arg.sin() + rng.gen_range(-0.05..0.05));
                for _ in 1..CHANNELS {
                    w.push(rng.gen_range(-0.05..0.05));
                }
            }
            windows.push(w);
            labels.push(if class == 0 { ExerciseClass::PEN } else { ExerciseClass::ABD });
        }
    }
    let n = windows.len();
    WindowTensor {
        data: windows.into_iter().flatten().collect(),
        n,
        len,
        labels,
        meta: (0..n)
            .map(|i| physio_arc::segment::WindowMeta { recording_index: 0, start_sample: i })
            .collect(),
        recordings: vec![],
        spec: SegmentationSpec::new(len as f64 / 50.0, 0.0, 50.0),
    }
}

#[test]
fn criterion_12_crnn_toy_sanity() {
    let len = 50;
    let train = toy_two_class(100, len, 7);
    let held_out = toy_two_class(30, len, 8);
    let cfg = CrnnConfig {
        conv_filters: [8, 8],
        kernel_size: 7,
        lstm_units: [8, 8],
        dropout: 0.1,
        epochs: 30,
        batch_size: 32,
        seed: 21,
        n_classes: 2,
        ..CrnnConfig::default()
    };
    let model = crnn_train(&train, &cfg).unwrap();
    let history_ok = model.history.len() == cfg.epochs;
    let train_acc = model.history.last().unwrap().accuracy;
    let (pred, _) = crnn_predict(&model, &held_out).unwrap();
    let correct =
        pred.iter().zip(&held_out.labels).filter(|(p, t)| **p == t.index()).count();
    let held_acc = correct as f64 / held_out.n as f64;
    verdict(
        12,
        history_ok && train_acc >= 0.99 && held_acc >= 0.95,
        &format!(
            "train {train_acc:.4}, held-out {held_acc:.4}, history length {}",
            model.history.len()
        ),
    );
}
