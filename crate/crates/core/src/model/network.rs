//! Full two-pathway network: strided 3-D convolutional encoder, a per-step
//! head and transposed-convolution decoder on the embedding (local pathway),
//! and the same pair behind a stacked recurrent aggregator (global pathway).

use super::config::{ModelConfig, UpsampleMode};
use super::kernels::ConvGeom;
use super::layers::*;
use super::params::{enc_names, Grads, ModelParams};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Batch statistics vs running statistics, and dropout on or off.
pub struct RunMode<'a> {
    pub batch_stats: bool,
    pub dropout: Option<&'a mut SeededRng>,
}

impl<'a> RunMode<'a> {
    pub fn eval() -> Self {
        Self {
            batch_stats: false,
            dropout: None,
        }
    }

    pub fn train(rng: &'a mut SeededRng) -> Self {
        Self {
            batch_stats: true,
            dropout: Some(rng),
        }
    }

    /// Training-mode normalization without dropout, for gradient checks.
    pub fn train_without_dropout() -> Self {
        Self {
            batch_stats: true,
            dropout: None,
        }
    }
}

/// Raw network outputs for a batch: signals `[batch, T]`, ROI logits
/// `[batch, T, H, W]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub batch: usize,
    pub signal_local: Vec<f64>,
    pub signal_global: Vec<f64>,
    pub roi_local: Vec<f64>,
    pub roi_global: Vec<f64>,
}

/// New running mean/var values, keyed by tensor index.
pub type StatUpdates = Vec<(usize, Vec<f64>)>;

struct MlpCache {
    inputs: Vec<Vec<f64>>,
}

struct EncCache {
    input: Vec<f64>,
    act: Vec<f64>,
    bn: BnCache,
    drop: Option<Vec<f64>>,
    out: Vec<f64>,
}

struct DecLevel {
    input: Vec<f64>,
    act: Vec<f64>,
    bn: Option<BnCache>,
}

struct LstmLayerCache {
    input: Vec<f64>,
    dirs: Vec<LstmCache>,
}

/// Everything the backward pass needs.
pub struct ForwardCache {
    batch: usize,
    enc: Vec<EncCache>,
    head_local: MlpCache,
    dec_local: Vec<DecLevel>,
    lstm: Vec<LstmLayerCache>,
    head_global: MlpCache,
    proj_out: Vec<f64>,
    dec_global: Vec<DecLevel>,
}

impl ForwardCache {
    /// Hash of every ReLU on/off decision, used to detect finite-difference
    /// probes that cross a kink.
    pub fn relu_signature(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        let mut feed = |v: &[f64]| {
            for x in v {
                (*x > 0.0).hash(&mut h);
            }
        };
        for e in &self.enc {
            feed(&e.act);
        }
        for lvl in self.dec_local.iter().chain(&self.dec_global) {
            feed(&lvl.act);
        }
        for m in [&self.head_local, &self.head_global] {
            for x in m.inputs.iter().skip(1) {
                feed(x);
            }
        }
        feed(&self.proj_out);
        h.finish()
    }
}

fn encoder_geom(cfg: &ModelConfig, i: usize) -> ConvGeom {
    let cin = if i == 0 { 1 } else { cfg.channels };
    let s = [cfg.temporal_strides[i], cfg.spatial_strides[i], cfg.spatial_strides[i]];
    ConvGeom::new(cin, cfg.kernel, s, cfg.level_dims(i))
}

/// Geometry of decoder level `i`, seen as the convolution it transposes.
fn decoder_geom(cfg: &ModelConfig, i: usize) -> ConvGeom {
    let cout = if i == 0 { 1 } else { cfg.channels };
    let s = [cfg.temporal_strides[i], cfg.spatial_strides[i], cfg.spatial_strides[i]];
    ConvGeom::new(cout, cfg.kernel, s, cfg.level_dims(i))
}

/// `[B, C, T', S]` to `[B, T', C*S]`.
fn to_sequence(x: &[f64], batch: usize, c: usize, t: usize, s: usize) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    for b in 0..batch {
        for ci in 0..c {
            for ti in 0..t {
                let src = ((b * c + ci) * t + ti) * s;
                let dst = (b * t + ti) * c * s + ci * s;
                y[dst..dst + s].copy_from_slice(&x[src..src + s]);
            }
        }
    }
    y
}

/// Inverse of [`to_sequence`].
fn from_sequence(y: &[f64], batch: usize, c: usize, t: usize, s: usize) -> Vec<f64> {
    let mut x = vec![0.0; y.len()];
    for b in 0..batch {
        for ci in 0..c {
            for ti in 0..t {
                let dst = ((b * c + ci) * t + ti) * s;
                let src = (b * t + ti) * c * s + ci * s;
                x[dst..dst + s].copy_from_slice(&y[src..src + s]);
            }
        }
    }
    x
}

/// Channel concatenation of two `[B, C_i, n]` tensors.
fn concat_channels(a: &[f64], b: &[f64], batch: usize) -> Vec<f64> {
    let (la, lb) = (a.len() / batch, b.len() / batch);
    let mut y = Vec::with_capacity(a.len() + b.len());
    for i in 0..batch {
        y.extend_from_slice(&a[i * la..(i + 1) * la]);
        y.extend_from_slice(&b[i * lb..(i + 1) * lb]);
    }
    y
}

fn split_channels(y: &[f64], batch: usize, la: usize) -> (Vec<f64>, Vec<f64>) {
    let l = y.len() / batch;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for i in 0..batch {
        a.extend_from_slice(&y[i * l..i * l + la]);
        b.extend_from_slice(&y[i * l + la..(i + 1) * l]);
    }
    (a, b)
}

fn mlp_forward(p: &ModelParams, prefix: &str, x: Vec<f64>, rows: usize, layers: usize) -> (Vec<f64>, MlpCache) {
    let mut inputs = Vec::with_capacity(layers);
    let mut h = x;
    for j in 0..layers {
        let mut y = linear_forward(&h, rows, p.data(&format!("{prefix}.{j}.weight")), p.data(&format!("{prefix}.{j}.bias")));
        if j + 1 < layers {
            relu_inplace(&mut y);
        }
        inputs.push(h);
        h = y;
    }
    (h, MlpCache { inputs })
}

fn mlp_backward(p: &ModelParams, g: &mut Grads, prefix: &str, cache: &MlpCache, dy: Vec<f64>, rows: usize) -> Vec<f64> {
    let layers = cache.inputs.len();
    let mut d = dy;
    for j in (0..layers).rev() {
        if j + 1 < layers {
            relu_backward_inplace(&mut d, &cache.inputs[j + 1]);
        }
        let wn = format!("{prefix}.{j}.weight");
        let (dx, dw, db) = linear_backward(&cache.inputs[j], rows, p.data(&wn), &d);
        g.add_named(p, &wn, &dw);
        g.add_named(p, &format!("{prefix}.{j}.bias"), &db);
        d = dx;
    }
    d
}

fn upsample(cfg: &ModelConfig, x: &[f64], rows: usize, src: usize) -> Vec<f64> {
    match cfg.upsample {
        UpsampleMode::Nearest => upsample_nearest(x, rows, src, cfg.frames),
        UpsampleMode::Linear => upsample_linear(x, rows, src, cfg.frames),
    }
}

fn upsample_backward(cfg: &ModelConfig, dy: &[f64], rows: usize, src: usize) -> Vec<f64> {
    match cfg.upsample {
        UpsampleMode::Nearest => upsample_nearest_backward(dy, rows, src, cfg.frames),
        UpsampleMode::Linear => upsample_linear_backward(dy, rows, src, cfg.frames),
    }
}

fn batchnorm(
    p: &ModelParams,
    prefix: &str,
    x: &[f64],
    batch: usize,
    channels: usize,
    mode: &RunMode,
    updates: &mut StatUpdates,
) -> (Vec<f64>, BnCache) {
    let gamma = p.data(&format!("{prefix}.bn.gamma"));
    let beta = p.data(&format!("{prefix}.bn.beta"));
    let mean_name = format!("{prefix}.bn.running_mean");
    let var_name = format!("{prefix}.bn.running_var");
    if mode.batch_stats {
        let (y, cache) = bn_forward(x, batch, channels, gamma, beta, None);
        let blend = |old: &[f64], new: &[f64]| -> Vec<f64> {
            old.iter().zip(new).map(|(o, n)| (1.0 - BN_MOMENTUM) * o + BN_MOMENTUM * n).collect()
        };
        updates.push((p.index_of(&mean_name).expect("bn tensor"), blend(p.data(&mean_name), &cache.mean)));
        updates.push((p.index_of(&var_name).expect("bn tensor"), blend(p.data(&var_name), &cache.var_unbiased)));
        (y, cache)
    } else {
        bn_forward(x, batch, channels, gamma, beta, Some((p.data(&mean_name), p.data(&var_name))))
    }
}

#[allow(clippy::too_many_arguments)]
fn decoder_forward(
    p: &ModelParams,
    cfg: &ModelConfig,
    prefix: &str,
    z: Vec<f64>,
    enc: &[EncCache],
    batch: usize,
    mode: &RunMode,
    updates: &mut StatUpdates,
) -> (Vec<f64>, Vec<DecLevel>) {
    let nb = cfg.blocks();
    let mut levels = Vec::with_capacity(nb);
    let mut z = z;
    for i in (0..nb).rev() {
        let input = if cfg.skip_connections && i + 1 < nb {
            concat_channels(&z, &enc[i].out, batch)
        } else {
            z
        };
        let geom = decoder_geom(cfg, i);
        let mut a = conv_t_forward(
            &input,
            batch,
            p.data(&format!("{prefix}.{i}.weight")),
            p.data(&format!("{prefix}.{i}.bias")),
            &geom,
        );
        if i > 0 {
            relu_inplace(&mut a);
            let (y, bn) = batchnorm(p, &format!("{prefix}.{i}"), &a, batch, cfg.channels, mode, updates);
            z = y;
            levels.push(DecLevel {
                input,
                act: a,
                bn: Some(bn),
            });
        } else {
            z = a;
            levels.push(DecLevel {
                input,
                act: Vec::new(),
                bn: None,
            });
        }
    }
    (z, levels)
}

/// Backward through a decoder. Skip-connection gradients are added to
/// `d_enc`; returns the gradient of the decoder input.
fn decoder_backward(
    p: &ModelParams,
    cfg: &ModelConfig,
    g: &mut Grads,
    prefix: &str,
    levels: &[DecLevel],
    dy: Vec<f64>,
    batch: usize,
    d_enc: &mut [Vec<f64>],
) -> Vec<f64> {
    let nb = cfg.blocks();
    let mut d = dy;
    // levels were applied from block nb-1 down to 0; undo them in reverse
    for i in 0..nb {
        let lvl = &levels[nb - 1 - i];
        if let Some(bn) = &lvl.bn {
            let bp = format!("{prefix}.{i}.bn");
            let (mut da, dg, db) = bn_backward(&d, batch, cfg.channels, p.data(&format!("{bp}.gamma")), bn);
            g.add_named(p, &format!("{bp}.gamma"), &dg);
            g.add_named(p, &format!("{bp}.beta"), &db);
            relu_backward_inplace(&mut da, &lvl.act);
            d = da;
        }
        let wn = format!("{prefix}.{i}.weight");
        let (dx, dw, db) = conv_t_backward(&lvl.input, batch, p.data(&wn), &d, &decoder_geom(cfg, i));
        g.add_named(p, &wn, &dw);
        g.add_named(p, &format!("{prefix}.{i}.bias"), &db);
        d = if cfg.skip_connections && i + 1 < nb {
            let per = cfg.channels * cfg.level_dims(i + 1).iter().product::<usize>();
            let (dz, de) = split_channels(&dx, batch, per);
            add_into(&mut d_enc[i], &de);
            dz
        } else {
            dx
        };
    }
    d
}

fn add_into(acc: &mut [f64], v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

fn head_layers(cfg: &ModelConfig) -> usize {
    cfg.head_widths.len() + 1
}

fn directions(cfg: &ModelConfig) -> &'static [&'static str] {
    if cfg.bidirectional {
        &["fwd", "bwd"]
    } else {
        &["fwd"]
    }
}

/// Forward pass over `frames: [batch, T, H, W]`. Returns the outputs, the
/// cache for [`backward`] and the running-statistic updates (empty unless
/// `mode.batch_stats`).
pub fn forward(
    p: &ModelParams,
    cfg: &ModelConfig,
    frames: &[f64],
    batch: usize,
    mut mode: RunMode,
) -> Result<(Outputs, ForwardCache, StatUpdates)> {
    let [t, h, w] = [cfg.frames, cfg.height, cfg.width];
    if batch == 0 || frames.len() != batch * t * h * w {
        return Err(Error::Parameter(format!(
            "input has {} values, model expects batch x {t} x {h} x {w}",
            frames.len()
        )));
    }
    let mut x = frames.to_vec();
    if cfg.center_input {
        let hw = h * w;
        for b in 0..batch {
            let clip = &mut x[b * t * hw..(b + 1) * t * hw];
            let mut mean = vec![0.0; hw];
            for f in clip.chunks(hw) {
                add_into(&mut mean, f);
            }
            mean.iter_mut().for_each(|m| *m /= t as f64);
            for f in clip.chunks_mut(hw) {
                for (v, m) in f.iter_mut().zip(&mean) {
                    *v -= m;
                }
            }
        }
    }

    let nb = cfg.blocks();
    let c = cfg.channels;
    let mut updates = StatUpdates::new();
    let mut enc = Vec::with_capacity(nb);
    let mut z = x;
    for i in 0..nb {
        let [wn, bn, ..] = enc_names(i);
        let mut a = conv3d_forward(&z, batch, p.data(&wn), p.data(&bn), &encoder_geom(cfg, i));
        relu_inplace(&mut a);
        let (mut y, bn_cache) = batchnorm(p, &format!("enc.{i}"), &a, batch, c, &mode, &mut updates);
        let drop = match mode.dropout.as_deref_mut() {
            Some(rng) if cfg.dropout > 0.0 => Some(dropout_inplace(&mut y, cfg.dropout, rng)),
            _ => None,
        };
        enc.push(EncCache {
            input: z,
            act: a,
            bn: bn_cache,
            drop,
            out: y.clone(),
        });
        z = y;
    }

    let [tp, eh, ew] = cfg.embedding_dims();
    let s = eh * ew;
    let d = cfg.embedding_width();
    let rows = batch * tp;
    let seq = to_sequence(&z, batch, c, tp, s);

    // local pathway
    let (sl, head_local) = mlp_forward(p, "head_local", seq.clone(), rows, head_layers(cfg));
    let signal_local = upsample(cfg, &sl, batch, tp);
    let (roi_local, dec_local) = decoder_forward(p, cfg, "dec_local", z, &enc, batch, &mode, &mut updates);

    // global pathway
    let hd = cfg.lstm_hidden;
    let dirs = directions(cfg);
    let mut lstm = Vec::with_capacity(cfg.lstm_layers);
    let mut hseq = seq;
    for l in 0..cfg.lstm_layers {
        let caches: Vec<LstmCache> = dirs
            .iter()
            .map(|dir| {
                let pre = format!("lstm.{l}.{dir}");
                lstm_forward(
                    &hseq,
                    batch,
                    tp,
                    p.data(&format!("{pre}.w_ih")),
                    p.data(&format!("{pre}.w_hh")),
                    p.data(&format!("{pre}.bias")),
                    *dir == "bwd",
                )
            })
            .collect();
        let width = hd * dirs.len();
        let mut out = vec![0.0; rows * width];
        for (k, cache) in caches.iter().enumerate() {
            for r in 0..rows {
                out[r * width + k * hd..r * width + (k + 1) * hd].copy_from_slice(&cache.hidden[r * hd..(r + 1) * hd]);
            }
        }
        lstm.push(LstmLayerCache {
            input: hseq,
            dirs: caches,
        });
        hseq = out;
    }
    let (sg, head_global) = mlp_forward(p, "head_global", hseq.clone(), rows, head_layers(cfg));
    let signal_global = upsample(cfg, &sg, batch, tp);
    let mut proj_out = linear_forward(&hseq, rows, p.data("proj.weight"), p.data("proj.bias"));
    relu_inplace(&mut proj_out);
    debug_assert_eq!(proj_out.len(), rows * d);
    let zg = from_sequence(&proj_out, batch, c, tp, s);
    let (roi_global, dec_global) = decoder_forward(p, cfg, "dec_global", zg, &enc, batch, &mode, &mut updates);
    // the last LSTM output is the head input, kept for backward there
    lstm.push(LstmLayerCache {
        input: hseq,
        dirs: Vec::new(),
    });

    let out = Outputs {
        batch,
        signal_local,
        signal_global,
        roi_local,
        roi_global,
    };
    for (name, v) in [
        ("signal_local", &out.signal_local),
        ("signal_global", &out.signal_global),
        ("roi_local", &out.roi_local),
        ("roi_global", &out.roi_global),
    ] {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric(format!("forward output {name}")));
        }
    }
    let cache = ForwardCache {
        batch,
        enc,
        head_local,
        dec_local,
        lstm,
        head_global,
        proj_out,
        dec_global,
    };
    Ok((out, cache, updates))
}

/// Gradients of all parameters given output gradients `dout` (same layout as
/// [`Outputs`]). Running statistics get zero gradient.
pub fn backward(p: &ModelParams, cfg: &ModelConfig, cache: &ForwardCache, dout: &Outputs) -> Result<Grads> {
    let batch = cache.batch;
    let nb = cfg.blocks();
    let c = cfg.channels;
    let [tp, eh, ew] = cfg.embedding_dims();
    let s = eh * ew;
    let rows = batch * tp;
    let hd = cfg.lstm_hidden;
    let dirs = directions(cfg);
    let mut g = Grads::zeros_like(p);
    let mut d_enc: Vec<Vec<f64>> = cache.enc.iter().map(|e| vec![0.0; e.out.len()]).collect();

    // global pathway
    let dg_roi = decoder_backward(p, cfg, &mut g, "dec_global", &cache.dec_global, dout.roi_global.clone(), batch, &mut d_enc);
    let mut dproj = to_sequence(&dg_roi, batch, c, tp, s);
    relu_backward_inplace(&mut dproj, &cache.proj_out);
    let hseq = &cache.lstm[cfg.lstm_layers].input;
    let (mut dh, dw, db) = linear_backward(hseq, rows, p.data("proj.weight"), &dproj);
    g.add_named(p, "proj.weight", &dw);
    g.add_named(p, "proj.bias", &db);
    let dsg = upsample_backward(cfg, &dout.signal_global, batch, tp);
    add_into(&mut dh, &mlp_backward(p, &mut g, "head_global", &cache.head_global, dsg, rows));
    for l in (0..cfg.lstm_layers).rev() {
        let layer = &cache.lstm[l];
        let width = hd * dirs.len();
        let mut dx_total = vec![0.0; layer.input.len()];
        for (k, dir) in dirs.iter().enumerate() {
            let dhk: Vec<f64> = (0..rows).flat_map(|r| dh[r * width + k * hd..r * width + (k + 1) * hd].to_vec()).collect();
            let pre = format!("lstm.{l}.{dir}");
            let (dx, dwi, dwh, db) = lstm_backward(
                &layer.input,
                batch,
                tp,
                p.data(&format!("{pre}.w_ih")),
                p.data(&format!("{pre}.w_hh")),
                &layer.dirs[k],
                &dhk,
                *dir == "bwd",
            );
            g.add_named(p, &format!("{pre}.w_ih"), &dwi);
            g.add_named(p, &format!("{pre}.w_hh"), &dwh);
            g.add_named(p, &format!("{pre}.bias"), &db);
            add_into(&mut dx_total, &dx);
        }
        dh = dx_total;
    }
    let mut dseq = dh;

    // local pathway
    let dsl = upsample_backward(cfg, &dout.signal_local, batch, tp);
    add_into(&mut dseq, &mlp_backward(p, &mut g, "head_local", &cache.head_local, dsl, rows));
    let dz_local = decoder_backward(p, cfg, &mut g, "dec_local", &cache.dec_local, dout.roi_local.clone(), batch, &mut d_enc);
    add_into(&mut d_enc[nb - 1], &dz_local);
    add_into(&mut d_enc[nb - 1], &from_sequence(&dseq, batch, c, tp, s));

    // encoder
    for i in (0..nb).rev() {
        let e = &cache.enc[i];
        let mut d = std::mem::take(&mut d_enc[i]);
        if let Some(mask) = &e.drop {
            for (v, m) in d.iter_mut().zip(mask) {
                *v *= m;
            }
        }
        let [wn, bn, gn, ben, ..] = enc_names(i);
        let (mut da, dgam, dbet) = bn_backward(&d, batch, c, p.data(&gn), &e.bn);
        g.add_named(p, &gn, &dgam);
        g.add_named(p, &ben, &dbet);
        relu_backward_inplace(&mut da, &e.act);
        let (dx, dw, db) = conv3d_backward(&e.input, batch, p.data(&wn), c, &da, &encoder_geom(cfg, i), i > 0);
        g.add_named(p, &wn, &dw);
        g.add_named(p, &bn, &db);
        if let Some(dx) = dx {
            add_into(&mut d_enc[i - 1], &dx);
        }
    }

    for (t, gd) in p.tensors.iter().zip(&g.data) {
        if gd.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("gradient of {}", t.name)));
        }
    }
    Ok(g)
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Per-term losses (already weighted) and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct LossBreakdown {
    pub total: f64,
    pub sig_local: f64,
    pub sig_global: f64,
    pub roi_local: f64,
    pub roi_global: f64,
}

fn mse(pred: &[f64], target: &[f64], weight: f64, grad: &mut [f64]) -> f64 {
    let n = pred.len() as f64;
    let mut acc = 0.0;
    for ((p, t), g) in pred.iter().zip(target).zip(grad.iter_mut()) {
        let d = p - t;
        acc += d * d;
        *g = weight * 2.0 * d / n;
    }
    weight * acc / n
}

/// Binary cross-entropy on logits, mean over pixels; positives weighted by
/// `pos_weight`.
fn bce_logits(logits: &[f64], target: &[f64], weight: f64, pos_weight: f64, grad: &mut [f64]) -> f64 {
    let n = logits.len() as f64;
    let mut acc = 0.0;
    for ((&z, &y), g) in logits.iter().zip(target).zip(grad.iter_mut()) {
        // -log(sigmoid(z)) = softplus(-z), -log(1 - sigmoid(z)) = softplus(z)
        // skipping zero-weight terms keeps infinite logits finite
        if y != 0.0 {
            acc += pos_weight * y * softplus(-z);
        }
        if y != 1.0 {
            acc += (1.0 - y) * softplus(z);
        }
        let s = sigmoid(z);
        *g = weight * (pos_weight * y * (s - 1.0) + (1.0 - y) * s) / n;
    }
    weight * acc / n
}

/// Weighted loss against target signals `[batch, T]` and masks
/// `[batch, T, H, W]` (0 or 1), with its gradient w.r.t. the outputs.
pub fn loss(out: &Outputs, signal: &[f64], masks: &[f64], cfg: &ModelConfig) -> Result<(LossBreakdown, Outputs)> {
    if signal.len() != out.signal_local.len() || masks.len() != out.roi_local.len() {
        return Err(Error::Shape(format!(
            "targets ({} signal, {} mask values) do not match outputs ({}, {})",
            signal.len(),
            masks.len(),
            out.signal_local.len(),
            out.roi_local.len()
        )));
    }
    let w = &cfg.loss;
    let mut grad = Outputs {
        batch: out.batch,
        signal_local: vec![0.0; signal.len()],
        signal_global: vec![0.0; signal.len()],
        roi_local: vec![0.0; masks.len()],
        roi_global: vec![0.0; masks.len()],
    };
    let sig_local = mse(&out.signal_local, signal, w.sig_local, &mut grad.signal_local);
    let sig_global = mse(&out.signal_global, signal, w.sig_global, &mut grad.signal_global);
    let roi_local = bce_logits(&out.roi_local, masks, w.roi_local, w.roi_pos_weight, &mut grad.roi_local);
    let roi_global = bce_logits(&out.roi_global, masks, w.roi_global, w.roi_pos_weight, &mut grad.roi_global);
    let total = sig_local + sig_global + roi_local + roi_global;
    if !total.is_finite() {
        return Err(Error::Numeric("loss".into()));
    }
    Ok((
        LossBreakdown {
            total,
            sig_local,
            sig_global,
            roi_local,
            roi_global,
        },
        grad,
    ))
}

/// Forward, loss and backward in one call.
pub fn loss_and_grads(
    p: &ModelParams,
    cfg: &ModelConfig,
    frames: &[f64],
    signal: &[f64],
    masks: &[f64],
    batch: usize,
    mode: RunMode,
) -> Result<(LossBreakdown, Grads, StatUpdates)> {
    let (out, cache, updates) = forward(p, cfg, frames, batch, mode)?;
    let (l, dout) = loss(&out, signal, masks, cfg)?;
    let g = backward(p, cfg, &cache, &dout)?;
    Ok((l, g, updates))
}

/// Logistic squashing of ROI logits into probabilities.
pub fn probabilities(logits: &[f64]) -> Vec<f64> {
    logits.iter().map(|&z| sigmoid(z)).collect()
}
