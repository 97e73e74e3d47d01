//! Neural-network layer primitives in f64: valid 1-D cross-correlation,
//! ReLU, size-2 max pooling, an LSTM with hard-sigmoid gates, and a dense
//! softmax cross-entropy head. Every forward has an exact matching backward;
//! all are covered by central finite-difference checks.
//!
//! Sequences are row-major T×C (`x[t*c + ch]`). Convolution kernels are
//! K×C_in×C_out, LSTM weights are [gate][unit][input] with gate order
//! i, f, g (candidate), o; dense weights are [output][input].

use crate::error::{Error, Result};

/// Output length of a valid (no padding) convolution.
pub fn conv_out_len(t: usize, k: usize, stride: usize) -> Option<usize> {
    if t < k || stride == 0 {
        None
    } else {
        Some((t - k) / stride + 1)
    }
}

pub fn conv1d_forward(
    x: &[f64],
    t: usize,
    c_in: usize,
    w: &[f64],
    k: usize,
    c_out: usize,
    b: &[f64],
    stride: usize,
) -> Result<Vec<f64>> {
    debug_assert_eq!(x.len(), t * c_in);
    debug_assert_eq!(w.len(), k * c_in * c_out);
    debug_assert_eq!(b.len(), c_out);
    let t_out = conv_out_len(t, k, stride).ok_or_else(|| {
        Error::shape("conv1d", format!("input length {t} shorter than kernel {k}"))
    })?;
    let mut out = vec![0.0f64; t_out * c_out];
    for tp in 0..t_out {
        let dst = &mut out[tp * c_out..(tp + 1) * c_out];
        dst.copy_from_slice(b);
        for kk in 0..k {
            let xrow = &x[(tp * stride + kk) * c_in..(tp * stride + kk + 1) * c_in];
            let wrow = &w[kk * c_in * c_out..(kk + 1) * c_in * c_out];
            for (ci, &xv) in xrow.iter().enumerate() {
                let wr = &wrow[ci * c_out..(ci + 1) * c_out];
                for (o, &wv) in wr.iter().enumerate() {
                    dst[o] += xv * wv;
                }
            }
        }
    }
    Ok(out)
}

/// Gradients w.r.t. input, kernel, and bias given the output gradient.
#[allow(clippy::too_many_arguments)]
pub fn conv1d_backward(
    x: &[f64],
    t: usize,
    c_in: usize,
    w: &[f64],
    k: usize,
    c_out: usize,
    stride: usize,
    grad_out: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let t_out = conv_out_len(t, k, stride).expect("shapes validated in forward");
    debug_assert_eq!(grad_out.len(), t_out * c_out);
    let mut gx = vec![0.0f64; t * c_in];
    let mut gw = vec![0.0f64; k * c_in * c_out];
    let mut gb = vec![0.0f64; c_out];
    for tp in 0..t_out {
        let go = &grad_out[tp * c_out..(tp + 1) * c_out];
        for (o, &g) in go.iter().enumerate() {
            gb[o] += g;
        }
        for kk in 0..k {
            let row = tp * stride + kk;
            let xrow = &x[row * c_in..(row + 1) * c_in];
            let wrow = &w[kk * c_in * c_out..(kk + 1) * c_in * c_out];
            let gxrow = &mut gx[row * c_in..(row + 1) * c_in];
            let gwrow = &mut gw[kk * c_in * c_out..(kk + 1) * c_in * c_out];
            for ci in 0..c_in {
                let wr = &wrow[ci * c_out..(ci + 1) * c_out];
                let gwr = &mut gwrow[ci * c_out..(ci + 1) * c_out];
                let xv = xrow[ci];
                let mut acc = 0.0;
                for (o, &g) in go.iter().enumerate() {
                    acc += g * wr[o];
                    gwr[o] += g * xv;
                }
                gxrow[ci] += acc;
            }
        }
    }
    (gx, gw, gb)
}

pub fn relu_forward(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v.max(0.0)).collect()
}

/// Subgradient 0 at the kink.
pub fn relu_backward(pre: &[f64], grad_out: &[f64]) -> Vec<f64> {
    pre.iter()
        .zip(grad_out)
        .map(|(&p, &g)| if p > 0.0 { g } else { 0.0 })
        .collect()
}

/// Per-channel max over disjoint pairs; an odd trailing element is dropped.
/// Returns the pooled sequence and per-output argmax rows (0 or 1; ties keep
/// the first element).
pub fn maxpool1d_forward(x: &[f64], t: usize, c: usize) -> Result<(Vec<f64>, Vec<u8>)> {
    if t < 2 {
        return Err(Error::shape("maxpool", format!("input length {t} shorter than pool size 2")));
    }
    let t_out = t / 2;
    let mut out = vec![0.0f64; t_out * c];
    let mut arg = vec![0u8; t_out * c];
    for p in 0..t_out {
        for ch in 0..c {
            let a = x[(2 * p) * c + ch];
            let b = x[(2 * p + 1) * c + ch];
            if b > a {
                out[p * c + ch] = b;
                arg[p * c + ch] = 1;
            } else {
                out[p * c + ch] = a;
            }
        }
    }
    Ok((out, arg))
}

pub fn maxpool1d_backward(arg: &[u8], grad_out: &[f64], t: usize, c: usize) -> Vec<f64> {
    let t_out = t / 2;
    let mut gx = vec![0.0f64; t * c];
    for p in 0..t_out {
        for ch in 0..c {
            let slot = (2 * p + arg[p * c + ch] as usize) * c + ch;
            gx[slot] += grad_out[p * c + ch];
        }
    }
    gx
}

pub fn hard_sigmoid(z: f64) -> f64 {
    (0.2 * z + 0.5).clamp(0.0, 1.0)
}

/// Derivative of the hard sigmoid; 0 in the saturated regions (|z| ≥ 2.5).
pub fn hard_sigmoid_grad(z: f64) -> f64 {
    if z > -2.5 && z < 2.5 {
        0.2
    } else {
        0.0
    }
}

/// Everything the LSTM backward pass needs from the forward pass.
#[derive(Debug, Clone)]
pub struct LstmCache {
    pub t_len: usize,
    pub c_in: usize,
    pub units: usize,
    /// Layer input as seen by the cell (post-dropout), T×C.
    pub x: Vec<f64>,
    /// Gate pre-activations, T×4U in gate order i,f,g,o.
    pub z: Vec<f64>,
    /// Activated gates, T×4U.
    pub gates: Vec<f64>,
    /// Cell states, T×U.
    pub c: Vec<f64>,
    /// Hidden states, T×U.
    pub h: Vec<f64>,
}

/// Standard LSTM recurrence from zero initial state:
/// i,f,o = hard_sigmoid(z), g = tanh(z), c_t = f∘c_{t-1} + i∘g,
/// h_t = o∘tanh(c_t).
pub fn lstm_forward(
    x: &[f64],
    t_len: usize,
    c_in: usize,
    w: &[f64],
    r: &[f64],
    b: &[f64],
    units: usize,
) -> Result<LstmCache> {
    if x.len() != t_len * c_in {
        return Err(Error::shape(
            "lstm",
            format!("input length {} does not match {t_len}×{c_in}", x.len()),
        ));
    }
    debug_assert_eq!(w.len(), 4 * units * c_in);
    debug_assert_eq!(r.len(), 4 * units * units);
    debug_assert_eq!(b.len(), 4 * units);
    let g4 = 4 * units;
    let mut cache = LstmCache {
        t_len,
        c_in,
        units,
        x: x.to_vec(),
        z: vec![0.0; t_len * g4],
        gates: vec![0.0; t_len * g4],
        c: vec![0.0; t_len * units],
        h: vec![0.0; t_len * units],
    };
    let mut h_prev = vec![0.0f64; units];
    let mut c_prev = vec![0.0f64; units];
    for t in 0..t_len {
        let xt = &x[t * c_in..(t + 1) * c_in];
        let z = &mut cache.z[t * g4..(t + 1) * g4];
        z.copy_from_slice(b);
        for (gate_u, zv) in z.iter_mut().enumerate() {
            let wrow = &w[gate_u * c_in..(gate_u + 1) * c_in];
            let mut acc = 0.0;
            for (c, &xv) in xt.iter().enumerate() {
                acc += wrow[c] * xv;
            }
            if t > 0 {
                let rrow = &r[gate_u * units..(gate_u + 1) * units];
                for (v, &hv) in h_prev.iter().enumerate() {
                    acc += rrow[v] * hv;
                }
            }
            *zv += acc;
        }
        let gates = &mut cache.gates[t * g4..(t + 1) * g4];
        for u in 0..units {
            gates[u] = hard_sigmoid(z[u]); // i
            gates[units + u] = hard_sigmoid(z[units + u]); // f
            gates[2 * units + u] = z[2 * units + u].tanh(); // g
            gates[3 * units + u] = hard_sigmoid(z[3 * units + u]); // o
        }
        for u in 0..units {
            let ct = gates[units + u] * c_prev[u] + gates[u] * gates[2 * units + u];
            cache.c[t * units + u] = ct;
            cache.h[t * units + u] = gates[3 * units + u] * ct.tanh();
        }
        h_prev.copy_from_slice(&cache.h[t * units..(t + 1) * units]);
        c_prev.copy_from_slice(&cache.c[t * units..(t + 1) * units]);
    }
    Ok(cache)
}

pub struct LstmGrads {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    pub r: Vec<f64>,
    pub b: Vec<f64>,
}

/// Backpropagation through time. `grad_h` is the loss gradient w.r.t. every
/// hidden state (T×U); pass zeros except the last row for last-state
/// readouts.
pub fn lstm_backward(cache: &LstmCache, w: &[f64], r: &[f64], grad_h: &[f64]) -> LstmGrads {
    let (t_len, c_in, units) = (cache.t_len, cache.c_in, cache.units);
    let g4 = 4 * units;
    let mut gx = vec![0.0f64; t_len * c_in];
    let mut gw = vec![0.0f64; 4 * units * c_in];
    let mut gr = vec![0.0f64; 4 * units * units];
    let mut gb = vec![0.0f64; 4 * units];
    let mut dh_next = vec![0.0f64; units];
    let mut dc_next = vec![0.0f64; units];
    let mut dz = vec![0.0f64; g4];
    for t in (0..t_len).rev() {
        let gates = &cache.gates[t * g4..(t + 1) * g4];
        let z = &cache.z[t * g4..(t + 1) * g4];
        for u in 0..units {
            let dh = grad_h[t * units + u] + dh_next[u];
            let ct = cache.c[t * units + u];
            let tanh_c = ct.tanh();
            let o = gates[3 * units + u];
            let dc = dh * o * (1.0 - tanh_c * tanh_c) + dc_next[u];
            let prev_c = if t == 0 { 0.0 } else { cache.c[(t - 1) * units + u] };
            let (i, f, g) = (gates[u], gates[units + u], gates[2 * units + u]);
            dz[u] = dc * g * hard_sigmoid_grad(z[u]);
            dz[units + u] = dc * prev_c * hard_sigmoid_grad(z[units + u]);
            dz[2 * units + u] = dc * i * (1.0 - g * g);
            dz[3 * units + u] = dh * tanh_c * hard_sigmoid_grad(z[3 * units + u]);
            dc_next[u] = dc * f;
        }
        let xt = &cache.x[t * c_in..(t + 1) * c_in];
        dh_next.iter_mut().for_each(|v| *v = 0.0);
        for gate_u in 0..g4 {
            let d = dz[gate_u];
            if d == 0.0 {
                continue;
            }
            gb[gate_u] += d;
            let gwrow = &mut gw[gate_u * c_in..(gate_u + 1) * c_in];
            let wrow = &w[gate_u * c_in..(gate_u + 1) * c_in];
            let gxrow = &mut gx[t * c_in..(t + 1) * c_in];
            for c in 0..c_in {
                gwrow[c] += d * xt[c];
                gxrow[c] += d * wrow[c];
            }
            if t > 0 {
                let h_prev = &cache.h[(t - 1) * units..t * units];
                let grrow = &mut gr[gate_u * units..(gate_u + 1) * units];
                let rrow = &r[gate_u * units..(gate_u + 1) * units];
                for v in 0..units {
                    grrow[v] += d * h_prev[v];
                    dh_next[v] += d * rrow[v];
                }
            }
        }
    }
    LstmGrads { x: gx, w: gw, r: gr, b: gb }
}

/// Numerically stable softmax (max subtraction), in place.
pub fn softmax_inplace(logits: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in logits.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in logits.iter_mut() {
        *v /= sum;
    }
}

pub struct DenseGrads {
    pub h: Vec<f64>,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

/// Batched dense → softmax → categorical cross-entropy head with L2 on the
/// dense weights only: loss = mean CE + λ‖W‖². `h` is n×u row-major.
#[allow(clippy::too_many_arguments)]
pub fn dense_softmax_xent(
    h: &[f64],
    n: usize,
    u: usize,
    w: &[f64],
    b: &[f64],
    c_out: usize,
    labels: &[usize],
    lambda: f64,
) -> (f64, DenseGrads) {
    debug_assert_eq!(h.len(), n * u);
    debug_assert_eq!(w.len(), c_out * u);
    debug_assert_eq!(labels.len(), n);
    let mut loss = 0.0;
    let mut gh = vec![0.0f64; n * u];
    let mut gw = vec![0.0f64; c_out * u];
    let mut gb = vec![0.0f64; c_out];
    let inv_n = 1.0 / n as f64;
    let mut probs = vec![0.0f64; c_out];
    for s in 0..n {
        let hs = &h[s * u..(s + 1) * u];
        for o in 0..c_out {
            let wrow = &w[o * u..(o + 1) * u];
            let mut acc = b[o];
            for (i, &hv) in hs.iter().enumerate() {
                acc += wrow[i] * hv;
            }
            probs[o] = acc;
        }
        softmax_inplace(&mut probs);
        loss -= probs[labels[s]].max(f64::MIN_POSITIVE).ln();
        for o in 0..c_out {
            let mut d = probs[o];
            if o == labels[s] {
                d -= 1.0;
            }
            d *= inv_n;
            gb[o] += d;
            let wrow = &w[o * u..(o + 1) * u];
            let gwrow = &mut gw[o * u..(o + 1) * u];
            let ghs = &mut gh[s * u..(s + 1) * u];
            for i in 0..u {
                gwrow[i] += d * hs[i];
                ghs[i] += d * wrow[i];
            }
        }
    }
    loss *= inv_n;
    let mut reg = 0.0;
    for (gwv, &wv) in gw.iter_mut().zip(w) {
        reg += wv * wv;
        *gwv += 2.0 * lambda * wv;
    }
    loss += lambda * reg;
    (loss, DenseGrads { h: gh, w: gw, b: gb })
}
