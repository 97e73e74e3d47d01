//! Convolutional-recurrent classifier over raw signal windows: two
//! conv+relu+maxpool blocks feed two stacked LSTM layers; the final hidden
//! state goes through a dense softmax head with L2-regularized weights.
//! Trained with Adam on shuffled mini-batches; inverted dropout on the LSTM
//! inputs during training only.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::Range;

use crate::data::ExerciseClass;
use crate::error::{Error, Result};
use crate::nn::adam::{adam_step, AdamParams, AdamState};
use crate::nn::layers::{
    conv1d_backward, conv1d_forward, conv_out_len, dense_softmax_xent, lstm_backward,
    lstm_forward, maxpool1d_backward, maxpool1d_forward, relu_backward, relu_forward,
    softmax_inplace, LstmCache,
};
use crate::rng::{stream, tag};
use crate::segment::{WindowTensor, CHANNELS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrnnConfig {
    pub conv_filters: [usize; 2],
    pub kernel_size: usize,
    pub conv_stride: usize,
    pub lstm_units: [usize; 2],
    pub dropout: f64,
    pub lambda: f64,
    pub adam: AdamParams,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub n_classes: usize,
}

impl Default for CrnnConfig {
    fn default() -> Self {
        CrnnConfig {
            conv_filters: [128, 128],
            kernel_size: 7,
            conv_stride: 1,
            lstm_units: [64, 64],
            dropout: 0.1,
            lambda: 0.01,
            adam: AdamParams::default(),
            epochs: 30,
            batch_size: 128,
            seed: 0x5EED,
            n_classes: ExerciseClass::COUNT,
        }
    }
}

impl CrnnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.conv_filters.iter().any(|&f| f == 0) || self.lstm_units.iter().any(|&u| u == 0) {
            return Err(Error::validation("filter and unit counts must be >= 1"));
        }
        if self.kernel_size == 0 || self.conv_stride == 0 {
            return Err(Error::validation("kernel size and stride must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::validation(format!(
                "dropout must be in [0, 1), got {}",
                self.dropout
            )));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::validation(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.batch_size == 0 {
            return Err(Error::validation("batch_size must be >= 1"));
        }
        if self.n_classes < 2 {
            return Err(Error::validation("need at least two output classes"));
        }
        Ok(())
    }
}

/// Per-stage sequence lengths for a given input window length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShapePlan {
    pub input_len: usize,
    pub conv1_len: usize,
    pub pool1_len: usize,
    pub conv2_len: usize,
    pub pool2_len: usize,
}

/// Derive all intermediate lengths, naming the first stage that fails.
pub fn plan_shapes(input_len: usize, cfg: &CrnnConfig) -> Result<ShapePlan> {
    let k = cfg.kernel_size;
    let s = cfg.conv_stride;
    let conv1_len = conv_out_len(input_len, k, s)
        .ok_or_else(|| Error::shape("conv1", format!("window length {input_len} < kernel {k}")))?;
    if conv1_len < 2 {
        return Err(Error::shape("pool1", format!("conv1 output length {conv1_len} < pool size 2")));
    }
    let pool1_len = conv1_len / 2;
    let conv2_len = conv_out_len(pool1_len, k, s)
        .ok_or_else(|| Error::shape("conv2", format!("pool1 output length {pool1_len} < kernel {k}")))?;
    if conv2_len < 2 {
        return Err(Error::shape("pool2", format!("conv2 output length {conv2_len} < pool size 2")));
    }
    let pool2_len = conv2_len / 2;
    Ok(ShapePlan { input_len, conv1_len, pool1_len, conv2_len, pool2_len })
}

/// Offsets of every parameter tensor inside the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamLayout {
    pub conv1_w: Range<usize>,
    pub conv1_b: Range<usize>,
    pub conv2_w: Range<usize>,
    pub conv2_b: Range<usize>,
    pub lstm1_w: Range<usize>,
    pub lstm1_r: Range<usize>,
    pub lstm1_b: Range<usize>,
    pub lstm2_w: Range<usize>,
    pub lstm2_r: Range<usize>,
    pub lstm2_b: Range<usize>,
    pub dense_w: Range<usize>,
    pub dense_b: Range<usize>,
    pub total: usize,
}

impl ParamLayout {
    pub fn new(cfg: &CrnnConfig) -> Self {
        let k = cfg.kernel_size;
        let [f1, f2] = cfg.conv_filters;
        let [u1, u2] = cfg.lstm_units;
        let c = cfg.n_classes;
        let mut cursor = 0usize;
        let mut next = |len: usize| {
            let r = cursor..cursor + len;
            cursor += len;
            r
        };
        let conv1_w = next(k * CHANNELS * f1);
        let conv1_b = next(f1);
        let conv2_w = next(k * f1 * f2);
        let conv2_b = next(f2);
        let lstm1_w = next(4 * u1 * f2);
        let lstm1_r = next(4 * u1 * u1);
        let lstm1_b = next(4 * u1);
        let lstm2_w = next(4 * u2 * u1);
        let lstm2_r = next(4 * u2 * u2);
        let lstm2_b = next(4 * u2);
        let dense_w = next(c * u2);
        let dense_b = next(c);
        ParamLayout {
            conv1_w,
            conv1_b,
            conv2_w,
            conv2_b,
            lstm1_w,
            lstm1_r,
            lstm1_b,
            lstm2_w,
            lstm2_r,
            lstm2_b,
            dense_w,
            dense_b,
            total: cursor,
        }
    }
}

/// Total trainable parameter count for a config (independent of window
/// length: convolutions share weights across time).
pub fn param_count(cfg: &CrnnConfig) -> usize {
    ParamLayout::new(cfg).total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrnnModel {
    pub config: CrnnConfig,
    pub input_len: usize,
    pub params: Vec<f64>,
    pub history: Vec<EpochStats>,
}

/// Fan-in-scaled uniform init; biases start at zero.
pub fn init_params(cfg: &CrnnConfig) -> Vec<f64> {
    let layout = ParamLayout::new(cfg);
    let k = cfg.kernel_size;
    let [f1, f2] = cfg.conv_filters;
    let [u1, u2] = cfg.lstm_units;
    let mut params = vec![0.0f64; layout.total];
    let mut rng = stream(cfg.seed, &[tag::NN_INIT]);
    let mut fill = |range: Range<usize>, fan_in: usize, params: &mut Vec<f64>| {
        let s = (1.0 / fan_in as f64).sqrt();
        for v in &mut params[range] {
            *v = rng.gen_range(-s..s);
        }
    };
    fill(layout.conv1_w.clone(), k * CHANNELS, &mut params);
    fill(layout.conv2_w.clone(), k * f1, &mut params);
    fill(layout.lstm1_w.clone(), f2, &mut params);
    fill(layout.lstm1_r.clone(), u1, &mut params);
    fill(layout.lstm2_w.clone(), u1, &mut params);
    fill(layout.lstm2_r.clone(), u2, &mut params);
    fill(layout.dense_w.clone(), u2, &mut params);
    params
}

struct SampleCache {
    conv1_pre: Vec<f64>,
    pool1: Vec<f64>,
    arg1: Vec<u8>,
    conv2_pre: Vec<f64>,
    arg2: Vec<u8>,
    mask1: Option<Vec<f64>>,
    mask2: Option<Vec<f64>>,
    lstm1: LstmCache,
    lstm2: LstmCache,
}

/// Dropout masks for both LSTM inputs of one sample (None at evaluation).
type Masks = (Option<Vec<f64>>, Option<Vec<f64>>);

fn draw_masks(cfg: &CrnnConfig, rng: &mut impl Rng) -> Masks {
    if cfg.dropout == 0.0 {
        return (None, None);
    }
    let keep = 1.0 - cfg.dropout;
    let mut draw = |n: usize| -> Vec<f64> {
        (0..n)
            .map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
            .collect()
    };
    (Some(draw(cfg.conv_filters[1])), Some(draw(cfg.lstm_units[0])))
}

fn apply_mask(x: &[f64], t_len: usize, mask: &Option<Vec<f64>>) -> Vec<f64> {
    match mask {
        None => x.to_vec(),
        Some(m) => {
            let c = m.len();
            let mut out = Vec::with_capacity(x.len());
            for t in 0..t_len {
                for ch in 0..c {
                    out.push(x[t * c + ch] * m[ch]);
                }
            }
            out
        }
    }
}

/// Full forward pass for one window; returns the cache and the final hidden
/// state of the top LSTM.
fn forward_sample(
    params: &[f64],
    layout: &ParamLayout,
    cfg: &CrnnConfig,
    plan: &ShapePlan,
    x: &[f64],
    masks: Masks,
) -> Result<(SampleCache, Vec<f64>)> {
    let k = cfg.kernel_size;
    let s = cfg.conv_stride;
    let [f1, f2] = cfg.conv_filters;
    let [u1, u2] = cfg.lstm_units;
    let conv1_pre = conv1d_forward(
        x,
        plan.input_len,
        CHANNELS,
        &params[layout.conv1_w.clone()],
        k,
        f1,
        &params[layout.conv1_b.clone()],
        s,
    )?;
    let a1 = relu_forward(&conv1_pre);
    let (pool1, arg1) = maxpool1d_forward(&a1, plan.conv1_len, f1)?;
    let conv2_pre = conv1d_forward(
        &pool1,
        plan.pool1_len,
        f1,
        &params[layout.conv2_w.clone()],
        k,
        f2,
        &params[layout.conv2_b.clone()],
        s,
    )?;
    let a2 = relu_forward(&conv2_pre);
    let (pool2, arg2) = maxpool1d_forward(&a2, plan.conv2_len, f2)?;

    let (mask1, mask2) = masks;
    let lstm1_in = apply_mask(&pool2, plan.pool2_len, &mask1);
    let lstm1 = lstm_forward(
        &lstm1_in,
        plan.pool2_len,
        f2,
        &params[layout.lstm1_w.clone()],
        &params[layout.lstm1_r.clone()],
        &params[layout.lstm1_b.clone()],
        u1,
    )?;
    let lstm2_in = apply_mask(&lstm1.h, plan.pool2_len, &mask2);
    let lstm2 = lstm_forward(
        &lstm2_in,
        plan.pool2_len,
        u1,
        &params[layout.lstm2_w.clone()],
        &params[layout.lstm2_r.clone()],
        &params[layout.lstm2_b.clone()],
        u2,
    )?;
    let h_last = lstm2.h[(plan.pool2_len - 1) * u2..].to_vec();
    Ok((
        SampleCache { conv1_pre, pool1, arg1, conv2_pre, arg2, mask1, mask2, lstm1, lstm2 },
        h_last,
    ))
}

/// Backward pass for one sample given the gradient w.r.t. its final hidden
/// state; accumulates parameter gradients into `grads`.
#[allow(clippy::too_many_arguments)]
fn backward_sample(
    params: &[f64],
    layout: &ParamLayout,
    cfg: &CrnnConfig,
    plan: &ShapePlan,
    x: &[f64],
    cache: &SampleCache,
    grad_h_last: &[f64],
    grads: &mut [f64],
) {
    let k = cfg.kernel_size;
    let s = cfg.conv_stride;
    let [f1, f2] = cfg.conv_filters;
    let [_u1, u2] = cfg.lstm_units;
    let t = plan.pool2_len;

    let mut grad_h2 = vec![0.0f64; t * u2];
    grad_h2[(t - 1) * u2..].copy_from_slice(grad_h_last);
    let g2 = lstm_backward(
        &cache.lstm2,
        &params[layout.lstm2_w.clone()],
        &params[layout.lstm2_r.clone()],
        &grad_h2,
    );
    add_into(&mut grads[layout.lstm2_w.clone()], &g2.w);
    add_into(&mut grads[layout.lstm2_r.clone()], &g2.r);
    add_into(&mut grads[layout.lstm2_b.clone()], &g2.b);

    let grad_h1 = match &cache.mask2 {
        None => g2.x,
        Some(m) => masked(&g2.x, t, m),
    };
    let g1 = lstm_backward(
        &cache.lstm1,
        &params[layout.lstm1_w.clone()],
        &params[layout.lstm1_r.clone()],
        &grad_h1,
    );
    add_into(&mut grads[layout.lstm1_w.clone()], &g1.w);
    add_into(&mut grads[layout.lstm1_r.clone()], &g1.r);
    add_into(&mut grads[layout.lstm1_b.clone()], &g1.b);

    let grad_pool2 = match &cache.mask1 {
        None => g1.x,
        Some(m) => masked(&g1.x, t, m),
    };
    let grad_a2 = maxpool1d_backward(&cache.arg2, &grad_pool2, plan.conv2_len, f2);
    let grad_conv2_pre = relu_backward(&cache.conv2_pre, &grad_a2);
    let (grad_pool1, gw2, gb2) = conv1d_backward(
        &cache.pool1,
        plan.pool1_len,
        f1,
        &params[layout.conv2_w.clone()],
        k,
        f2,
        s,
        &grad_conv2_pre,
    );
    add_into(&mut grads[layout.conv2_w.clone()], &gw2);
    add_into(&mut grads[layout.conv2_b.clone()], &gb2);

    let grad_a1 = maxpool1d_backward(&cache.arg1, &grad_pool1, plan.conv1_len, f1);
    let grad_conv1_pre = relu_backward(&cache.conv1_pre, &grad_a1);
    let (_, gw1, gb1) = conv1d_backward(
        x,
        plan.input_len,
        CHANNELS,
        &params[layout.conv1_w.clone()],
        k,
        f1,
        s,
        &grad_conv1_pre,
    );
    add_into(&mut grads[layout.conv1_w.clone()], &gw1);
    add_into(&mut grads[layout.conv1_b.clone()], &gb1);
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, &v) in dst.iter_mut().zip(src) {
        *d += v;
    }
}

fn masked(x: &[f64], t_len: usize, mask: &[f64]) -> Vec<f64> {
    let c = mask.len();
    let mut out = Vec::with_capacity(x.len());
    for t in 0..t_len {
        for ch in 0..c {
            out.push(x[t * c + ch] * mask[ch]);
        }
    }
    out
}

/// Batch loss (mean cross-entropy + λ‖W_dense‖²) and the gradient over the
/// full flat parameter vector, with dropout disabled. This is the exact
/// objective one Adam step descends; it is also the hook for whole-network
/// finite-difference checks.
pub fn loss_and_gradients(
    cfg: &CrnnConfig,
    input_len: usize,
    params: &[f64],
    x: &[f64],
    labels: &[usize],
) -> Result<(f64, Vec<f64>)> {
    let layout = ParamLayout::new(cfg);
    let plan = plan_shapes(input_len, cfg)?;
    let n = labels.len();
    let u2 = cfg.lstm_units[1];
    let mut caches = Vec::with_capacity(n);
    let mut h_batch = Vec::with_capacity(n * u2);
    for i in 0..n {
        let window = &x[i * input_len * CHANNELS..(i + 1) * input_len * CHANNELS];
        let (cache, h_last) = forward_sample(params, &layout, cfg, &plan, window, (None, None))?;
        caches.push(cache);
        h_batch.extend_from_slice(&h_last);
    }
    let (loss, dense) = dense_softmax_xent(
        &h_batch,
        n,
        u2,
        &params[layout.dense_w.clone()],
        &params[layout.dense_b.clone()],
        cfg.n_classes,
        labels,
        cfg.lambda,
    );
    let mut grads = vec![0.0f64; layout.total];
    grads[layout.dense_w.clone()].copy_from_slice(&dense.w);
    grads[layout.dense_b.clone()].copy_from_slice(&dense.b);
    for i in 0..n {
        let window = &x[i * input_len * CHANNELS..(i + 1) * input_len * CHANNELS];
        backward_sample(
            params,
            &layout,
            cfg,
            &plan,
            window,
            &caches[i],
            &dense.h[i * u2..(i + 1) * u2],
            &mut grads,
        );
    }
    Ok((loss, grads))
}

/// Train on raw windows. Batches are shuffled per epoch from a seeded
/// stream; updates are applied batch-sequentially so the result depends only
/// on the seed.
pub fn crnn_train(tensor: &WindowTensor, cfg: &CrnnConfig) -> Result<CrnnModel> {
    cfg.validate()?;
    let plan = plan_shapes(tensor.len, cfg)?;
    let n = tensor.n;
    if n == 0 {
        return Err(Error::validation("cannot train on zero windows"));
    }
    let labels: Vec<usize> = tensor.labels.iter().map(|c| c.index()).collect();
    if let Some(&bad) = labels.iter().find(|&&c| c >= cfg.n_classes) {
        return Err(Error::validation(format!(
            "label {bad} out of range for {} classes",
            cfg.n_classes
        )));
    }
    {
        let mut distinct = labels.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() < 2 {
            return Err(Error::validation("training data must contain at least two classes"));
        }
    }

    let layout = ParamLayout::new(cfg);
    let mut params = init_params(cfg);
    let mut adam = AdamState::new(layout.total);
    let u2 = cfg.lstm_units[1];
    let mut grads = vec![0.0f64; layout.total];
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut stream(cfg.seed, &[tag::NN_SHUFFLE, epoch as u64]));
        let mut dropout_rng = stream(cfg.seed, &[tag::NN_DROPOUT, epoch as u64]);
        let mut epoch_loss = 0.0;
        let mut epoch_correct = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            let nb = batch.len();
            let mut caches = Vec::with_capacity(nb);
            let mut h_batch = Vec::with_capacity(nb * u2);
            let mut batch_labels = Vec::with_capacity(nb);
            for &i in batch {
                let masks = draw_masks(cfg, &mut dropout_rng);
                let (cache, h_last) =
                    forward_sample(&params, &layout, cfg, &plan, tensor.window(i), masks)?;
                // Running training accuracy from the pre-update logits.
                let mut logits = vec![0.0f64; cfg.n_classes];
                let dw = &params[layout.dense_w.clone()];
                let db = &params[layout.dense_b.clone()];
                for (o, l) in logits.iter_mut().enumerate() {
                    let wrow = &dw[o * u2..(o + 1) * u2];
                    *l = db[o] + wrow.iter().zip(&h_last).map(|(w, h)| w * h).sum::<f64>();
                }
                let pred = logits
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .unwrap()
                    .0;
                if pred == labels[i] {
                    epoch_correct += 1;
                }
                caches.push(cache);
                h_batch.extend_from_slice(&h_last);
                batch_labels.push(labels[i]);
            }
            let (loss, dense) = dense_softmax_xent(
                &h_batch,
                nb,
                u2,
                &params[layout.dense_w.clone()],
                &params[layout.dense_b.clone()],
                cfg.n_classes,
                &batch_labels,
                cfg.lambda,
            );
            grads.iter_mut().for_each(|g| *g = 0.0);
            grads[layout.dense_w.clone()].copy_from_slice(&dense.w);
            grads[layout.dense_b.clone()].copy_from_slice(&dense.b);
            for (slot, &i) in batch.iter().enumerate() {
                backward_sample(
                    &params,
                    &layout,
                    cfg,
                    &plan,
                    tensor.window(i),
                    &caches[slot],
                    &dense.h[slot * u2..(slot + 1) * u2],
                    &mut grads,
                );
            }
            adam_step(&mut params, &grads, &mut adam, &cfg.adam);
            epoch_loss += loss * nb as f64;
        }
        history.push(EpochStats {
            epoch,
            loss: epoch_loss / n as f64,
            accuracy: epoch_correct as f64 / n as f64,
        });
    }

    Ok(CrnnModel { config: cfg.clone(), input_len: tensor.len, params, history })
}

/// Predict labels and softmax probability rows (n × n_classes) with dropout
/// disabled.
pub fn crnn_predict(model: &CrnnModel, tensor: &WindowTensor) -> Result<(Vec<usize>, Vec<f64>)> {
    if tensor.len != model.input_len {
        return Err(Error::shape(
            "input",
            format!(
                "window length {} does not match the trained length {}",
                tensor.len, model.input_len
            ),
        ));
    }
    let cfg = &model.config;
    let layout = ParamLayout::new(cfg);
    let plan = plan_shapes(model.input_len, cfg)?;
    let u2 = cfg.lstm_units[1];
    let nc = cfg.n_classes;
    let probs: Result<Vec<Vec<f64>>> = (0..tensor.n)
        .into_par_iter()
        .map(|i| {
            let (_, h_last) =
                forward_sample(&model.params, &layout, cfg, &plan, tensor.window(i), (None, None))?;
            let dw = &model.params[layout.dense_w.clone()];
            let db = &model.params[layout.dense_b.clone()];
            let mut logits = vec![0.0f64; nc];
            for (o, l) in logits.iter_mut().enumerate() {
                let wrow = &dw[o * u2..(o + 1) * u2];
                *l = db[o] + wrow.iter().zip(&h_last).map(|(w, h)| w * h).sum::<f64>();
            }
            softmax_inplace(&mut logits);
            Ok(logits)
        })
        .collect();
    let probs = probs?;
    let labels = probs
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0
        })
        .collect();
    Ok((labels, probs.into_iter().flatten().collect()))
}
