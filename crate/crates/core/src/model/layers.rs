//! Forward and backward passes of the individual layers. Activations are
//! row-major `[batch, channels, T, H, W]` or `[rows, features]` buffers.

use rand::Rng;

use super::kernels::{gemm, ConvGeom};

pub const BN_EPS: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.1;

/// 3-D convolution. `w` is `[cout, geom.channels * k^3]`, output is
/// `[batch, cout, geom.out_dims]`.
pub fn conv3d_forward(x: &[f64], batch: usize, w: &[f64], bias: &[f64], geom: &ConvGeom) -> Vec<f64> {
    let cout = bias.len();
    let (kk, n_in, n_out) = (geom.col_rows(), geom.channels * geom.in_len(), geom.out_len());
    let mut cols = vec![0.0; kk * n_out];
    let mut y = vec![0.0; batch * cout * n_out];
    for b in 0..batch {
        geom.im2col(&x[b * n_in..(b + 1) * n_in], &mut cols);
        let yb = &mut y[b * cout * n_out..(b + 1) * cout * n_out];
        for (c, row) in yb.chunks_mut(n_out).enumerate() {
            row.fill(bias[c]);
        }
        gemm(cout, kk, n_out, 1.0, w, false, &cols, false, 1.0, yb);
    }
    y
}

/// Returns `(dx, dw, db)`; `dx` only when `need_dx`.
pub fn conv3d_backward(
    x: &[f64],
    batch: usize,
    w: &[f64],
    cout: usize,
    dy: &[f64],
    geom: &ConvGeom,
    need_dx: bool,
) -> (Option<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let (kk, n_in, n_out) = (geom.col_rows(), geom.channels * geom.in_len(), geom.out_len());
    let mut cols = vec![0.0; kk * n_out];
    let mut dw = vec![0.0; cout * kk];
    let mut db = vec![0.0; cout];
    let mut dx = need_dx.then(|| vec![0.0; batch * n_in]);
    for b in 0..batch {
        let dyb = &dy[b * cout * n_out..(b + 1) * cout * n_out];
        for (c, row) in dyb.chunks(n_out).enumerate() {
            db[c] += row.iter().sum::<f64>();
        }
        geom.im2col(&x[b * n_in..(b + 1) * n_in], &mut cols);
        gemm(cout, n_out, kk, 1.0, dyb, false, &cols, true, 1.0, &mut dw);
        if let Some(dx) = dx.as_mut() {
            gemm(kk, cout, n_out, 1.0, w, true, dyb, false, 0.0, &mut cols);
            geom.col2im(&cols, &mut dx[b * n_in..(b + 1) * n_in]);
        }
    }
    (dx, dw, db)
}

/// Transposed 3-D convolution, the adjoint of a convolution with geometry
/// `geom` (whose input is this layer's output). `x` is
/// `[batch, cin, geom.out_dims]`, `w` is `[cin, geom.channels * k^3]`,
/// output `[batch, geom.channels, geom.in_dims]`.
pub fn conv_t_forward(x: &[f64], batch: usize, w: &[f64], bias: &[f64], geom: &ConvGeom) -> Vec<f64> {
    let cin = w.len() / geom.col_rows();
    let (kk, n_small, n_large) = (geom.col_rows(), geom.out_len(), geom.in_len());
    let cout = geom.channels;
    let mut cols = vec![0.0; kk * n_small];
    let mut y = vec![0.0; batch * cout * n_large];
    for b in 0..batch {
        let xb = &x[b * cin * n_small..(b + 1) * cin * n_small];
        gemm(kk, cin, n_small, 1.0, w, true, xb, false, 0.0, &mut cols);
        let yb = &mut y[b * cout * n_large..(b + 1) * cout * n_large];
        for (c, row) in yb.chunks_mut(n_large).enumerate() {
            row.fill(bias[c]);
        }
        geom.col2im(&cols, yb);
    }
    y
}

/// Returns `(dx, dw, db)` of [`conv_t_forward`].
pub fn conv_t_backward(x: &[f64], batch: usize, w: &[f64], dy: &[f64], geom: &ConvGeom) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let cin = w.len() / geom.col_rows();
    let (kk, n_small, n_large) = (geom.col_rows(), geom.out_len(), geom.in_len());
    let cout = geom.channels;
    let mut cols = vec![0.0; kk * n_small];
    let mut dx = vec![0.0; batch * cin * n_small];
    let mut dw = vec![0.0; w.len()];
    let mut db = vec![0.0; cout];
    for b in 0..batch {
        let dyb = &dy[b * cout * n_large..(b + 1) * cout * n_large];
        for (c, row) in dyb.chunks(n_large).enumerate() {
            db[c] += row.iter().sum::<f64>();
        }
        geom.im2col(dyb, &mut cols);
        let xb = &x[b * cin * n_small..(b + 1) * cin * n_small];
        gemm(cin, kk, n_small, 1.0, w, false, &cols, false, 0.0, &mut dx[b * cin * n_small..(b + 1) * cin * n_small]);
        gemm(cin, n_small, kk, 1.0, xb, false, &cols, true, 1.0, &mut dw);
    }
    (dx, dw, db)
}

pub fn relu_inplace(x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v = v.max(0.0));
}

/// Zeroes `dy` wherever the ReLU output `y` was not positive.
pub fn relu_backward_inplace(dy: &mut [f64], y: &[f64]) {
    for (d, &v) in dy.iter_mut().zip(y) {
        if v <= 0.0 {
            *d = 0.0;
        }
    }
}

#[derive(Debug, Clone)]
pub struct BnCache {
    pub xhat: Vec<f64>,
    pub inv_std: Vec<f64>,
    pub batch_stats: bool,
    /// Batch mean and unbiased variance, for the running averages.
    pub mean: Vec<f64>,
    pub var_unbiased: Vec<f64>,
}

/// Per-channel normalization over `[batch, channels, n]`. With `running`
/// given, its `(mean, var)` are used instead of batch statistics.
pub fn bn_forward(
    x: &[f64],
    batch: usize,
    channels: usize,
    gamma: &[f64],
    beta: &[f64],
    running: Option<(&[f64], &[f64])>,
) -> (Vec<f64>, BnCache) {
    let n = x.len() / (batch * channels);
    let m = (batch * n) as f64;
    let mut mean = vec![0.0; channels];
    let mut var = vec![0.0; channels];
    match running {
        Some((rm, rv)) => {
            mean.copy_from_slice(rm);
            var.copy_from_slice(rv);
        }
        None => {
            for b in 0..batch {
                for c in 0..channels {
                    let s = &x[(b * channels + c) * n..(b * channels + c + 1) * n];
                    mean[c] += s.iter().sum::<f64>();
                }
            }
            mean.iter_mut().for_each(|v| *v /= m);
            for b in 0..batch {
                for c in 0..channels {
                    let s = &x[(b * channels + c) * n..(b * channels + c + 1) * n];
                    var[c] += s.iter().map(|v| (v - mean[c]).powi(2)).sum::<f64>();
                }
            }
            var.iter_mut().for_each(|v| *v /= m);
        }
    }
    let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + BN_EPS).sqrt()).collect();
    let mut xhat = vec![0.0; x.len()];
    let mut y = vec![0.0; x.len()];
    for b in 0..batch {
        for c in 0..channels {
            let r = (b * channels + c) * n..(b * channels + c + 1) * n;
            for i in r {
                xhat[i] = (x[i] - mean[c]) * inv_std[c];
                y[i] = gamma[c] * xhat[i] + beta[c];
            }
        }
    }
    let var_unbiased = if m > 1.0 { var.iter().map(|v| v * m / (m - 1.0)).collect() } else { var };
    (
        y,
        BnCache {
            xhat,
            inv_std,
            batch_stats: running.is_none(),
            mean,
            var_unbiased,
        },
    )
}

/// Returns `(dx, dgamma, dbeta)`.
pub fn bn_backward(dy: &[f64], batch: usize, channels: usize, gamma: &[f64], cache: &BnCache) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = dy.len() / (batch * channels);
    let m = (batch * n) as f64;
    let mut dgamma = vec![0.0; channels];
    let mut dbeta = vec![0.0; channels];
    for b in 0..batch {
        for c in 0..channels {
            for i in (b * channels + c) * n..(b * channels + c + 1) * n {
                dgamma[c] += dy[i] * cache.xhat[i];
                dbeta[c] += dy[i];
            }
        }
    }
    let mut dx = vec![0.0; dy.len()];
    for b in 0..batch {
        for c in 0..channels {
            let k = gamma[c] * cache.inv_std[c];
            for i in (b * channels + c) * n..(b * channels + c + 1) * n {
                dx[i] = if cache.batch_stats {
                    k * (dy[i] - dbeta[c] / m - cache.xhat[i] * dgamma[c] / m)
                } else {
                    k * dy[i]
                };
            }
        }
    }
    (dx, dgamma, dbeta)
}

/// Inverted dropout; returns the per-element scale (0 or `1/(1-p)`).
pub fn dropout_inplace<R: Rng + ?Sized>(x: &mut [f64], p: f64, rng: &mut R) -> Vec<f64> {
    let keep = 1.0 / (1.0 - p);
    let mask: Vec<f64> = (0..x.len()).map(|_| if rng.gen_bool(p) { 0.0 } else { keep }).collect();
    for (v, m) in x.iter_mut().zip(&mask) {
        *v *= m;
    }
    mask
}

/// `y = x W^T + b` for `x: [rows, in]`, `w: [out, in]`.
pub fn linear_forward(x: &[f64], rows: usize, w: &[f64], bias: &[f64]) -> Vec<f64> {
    let out = bias.len();
    let inp = w.len() / out;
    let mut y: Vec<f64> = (0..rows).flat_map(|_| bias.iter().copied()).collect();
    gemm(rows, inp, out, 1.0, x, false, w, true, 1.0, &mut y);
    y
}

/// Returns `(dx, dw, db)`.
pub fn linear_backward(x: &[f64], rows: usize, w: &[f64], dy: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let out = dy.len() / rows;
    let inp = w.len() / out;
    let mut dx = vec![0.0; rows * inp];
    let mut dw = vec![0.0; out * inp];
    gemm(rows, out, inp, 1.0, dy, false, w, false, 0.0, &mut dx);
    gemm(out, rows, inp, 1.0, dy, true, x, false, 0.0, &mut dw);
    let mut db = vec![0.0; out];
    for r in dy.chunks(out) {
        for (d, v) in db.iter_mut().zip(r) {
            *d += v;
        }
    }
    (dx, dw, db)
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Per-step gate activations of one LSTM direction, `[batch, T, 4H]` in
/// gate order input, forget, cell, output, plus cell states `[batch, T, H]`.
#[derive(Debug, Clone)]
pub struct LstmCache {
    pub gates: Vec<f64>,
    pub cells: Vec<f64>,
    pub hidden: Vec<f64>,
}

/// One LSTM direction over `x: [batch, T, in]`. `reverse` runs from the last
/// step to the first. Returns hidden states `[batch, T, H]`.
pub fn lstm_forward(
    x: &[f64],
    batch: usize,
    steps: usize,
    w_ih: &[f64],
    w_hh: &[f64],
    bias: &[f64],
    reverse: bool,
) -> LstmCache {
    let h4 = bias.len();
    let h = h4 / 4;
    // input projections for all steps at once
    let mut pre = linear_forward(x, batch * steps, w_ih, bias);
    let mut cells = vec![0.0; batch * steps * h];
    let mut hidden = vec![0.0; batch * steps * h];
    let mut h_prev = vec![0.0; batch * h];
    let mut c_prev = vec![0.0; batch * h];
    let mut rec = vec![0.0; batch * h4];
    for s in 0..steps {
        let t = if reverse { steps - 1 - s } else { s };
        gemm(batch, h, h4, 1.0, &h_prev, false, w_hh, true, 0.0, &mut rec);
        for b in 0..batch {
            let z = &mut pre[(b * steps + t) * h4..(b * steps + t + 1) * h4];
            for j in 0..h4 {
                z[j] += rec[b * h4 + j];
            }
            for j in 0..h {
                let i = sigmoid(z[j]);
                let f = sigmoid(z[h + j]);
                let g = z[2 * h + j].tanh();
                let o = sigmoid(z[3 * h + j]);
                let c = f * c_prev[b * h + j] + i * g;
                let hv = o * c.tanh();
                z[j] = i;
                z[h + j] = f;
                z[2 * h + j] = g;
                z[3 * h + j] = o;
                cells[(b * steps + t) * h + j] = c;
                hidden[(b * steps + t) * h + j] = hv;
                c_prev[b * h + j] = c;
                h_prev[b * h + j] = hv;
            }
        }
    }
    LstmCache {
        gates: pre,
        cells,
        hidden,
    }
}

/// Backward of [`lstm_forward`] given `dh: [batch, T, H]`. Returns
/// `(dx, dw_ih, dw_hh, dbias)`.
#[allow(clippy::too_many_arguments)]
pub fn lstm_backward(
    x: &[f64],
    batch: usize,
    steps: usize,
    w_ih: &[f64],
    w_hh: &[f64],
    cache: &LstmCache,
    dh: &[f64],
    reverse: bool,
) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let h = cache.cells.len() / (batch * steps);
    let h4 = 4 * h;
    let mut dz = vec![0.0; batch * steps * h4];
    let mut dh_next = vec![0.0; batch * h];
    let mut dc_next = vec![0.0; batch * h];
    let mut dh_rec = vec![0.0; batch * h];
    let mut dz_step = vec![0.0; batch * h4];
    let mut h_prev_step = vec![0.0; batch * h];
    let mut dw_hh = vec![0.0; w_hh.len()];
    for s in (0..steps).rev() {
        let t = if reverse { steps - 1 - s } else { s };
        let prev_t = if s == 0 { None } else { Some(if reverse { t + 1 } else { t - 1 }) };
        for b in 0..batch {
            for j in 0..h {
                let g = &cache.gates[(b * steps + t) * h4..(b * steps + t + 1) * h4];
                let (i, f, gg, o) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
                let c = cache.cells[(b * steps + t) * h + j];
                let c_prev = prev_t.map_or(0.0, |p| cache.cells[(b * steps + p) * h + j]);
                let tc = c.tanh();
                let dht = dh[(b * steps + t) * h + j] + dh_next[b * h + j];
                let dc = dht * o * (1.0 - tc * tc) + dc_next[b * h + j];
                let d = &mut dz_step[b * h4..(b + 1) * h4];
                d[j] = dc * gg * i * (1.0 - i);
                d[h + j] = dc * c_prev * f * (1.0 - f);
                d[2 * h + j] = dc * i * (1.0 - gg * gg);
                d[3 * h + j] = dht * tc * o * (1.0 - o);
                dc_next[b * h + j] = dc * f;
                h_prev_step[b * h + j] = prev_t.map_or(0.0, |p| cache.hidden[(b * steps + p) * h + j]);
            }
            dz[(b * steps + t) * h4..(b * steps + t + 1) * h4].copy_from_slice(&dz_step[b * h4..(b + 1) * h4]);
        }
        gemm(batch, h4, h, 1.0, &dz_step, false, w_hh, false, 0.0, &mut dh_rec);
        dh_next.copy_from_slice(&dh_rec);
        gemm(h4, batch, h, 1.0, &dz_step, true, &h_prev_step, false, 1.0, &mut dw_hh);
    }
    let (dx, dw_ih, db) = linear_backward(x, batch * steps, w_ih, &dz);
    (dx, dw_ih, dw_hh, db)
}

/// Nearest-neighbour stretch from `[rows, src]` to `[rows, dst]`; `dst`
/// must be a multiple of `src`.
pub fn upsample_nearest(x: &[f64], rows: usize, src: usize, dst: usize) -> Vec<f64> {
    let f = dst / src;
    let mut y = Vec::with_capacity(rows * dst);
    for r in 0..rows {
        for i in 0..src {
            y.extend(std::iter::repeat(x[r * src + i]).take(f));
        }
    }
    y
}

pub fn upsample_nearest_backward(dy: &[f64], rows: usize, src: usize, dst: usize) -> Vec<f64> {
    let f = dst / src;
    dy.chunks(f).map(|c| c.iter().sum()).collect::<Vec<f64>>()[..rows * src].to_vec()
}

/// Linear interpolation from `[rows, src]` to `[rows, dst]` with half-pixel
/// aligned sample centers.
pub fn upsample_linear(x: &[f64], rows: usize, src: usize, dst: usize) -> Vec<f64> {
    let mut y = vec![0.0; rows * dst];
    for (t, (i0, i1, w)) in interp_weights(src, dst).into_iter().enumerate() {
        for r in 0..rows {
            y[r * dst + t] = (1.0 - w) * x[r * src + i0] + w * x[r * src + i1];
        }
    }
    y
}

pub fn upsample_linear_backward(dy: &[f64], rows: usize, src: usize, dst: usize) -> Vec<f64> {
    let mut dx = vec![0.0; rows * src];
    for (t, (i0, i1, w)) in interp_weights(src, dst).into_iter().enumerate() {
        for r in 0..rows {
            dx[r * src + i0] += (1.0 - w) * dy[r * dst + t];
            dx[r * src + i1] += w * dy[r * dst + t];
        }
    }
    dx
}

fn interp_weights(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    (0..dst)
        .map(|t| {
            let pos = ((t as f64 + 0.5) * src as f64 / dst as f64 - 0.5).max(0.0);
            let i0 = (pos.floor() as usize).min(src - 1);
            let i1 = (i0 + 1).min(src - 1);
            (i0, i1, pos - i0 as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn rand_vec(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = seeded(seed, 0);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    /// Central differences of `f` at `x` projected on `dir`.
    fn directional(f: &dyn Fn(&[f64]) -> f64, x: &[f64], dir: &[f64]) -> f64 {
        let eps = 1e-6;
        let plus: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + eps * d).collect();
        let minus: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a - eps * d).collect();
        (f(&plus) - f(&minus)) / (2.0 * eps)
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs().max(b.abs())), "{a} vs {b}");
    }

    #[test]
    fn conv_gradients() {
        let g = ConvGeom::new(2, 3, [2, 1, 2], [4, 3, 4]);
        let cout = 3;
        let x = rand_vec(2 * 2 * g.in_len(), 1);
        let w = rand_vec(cout * g.col_rows(), 2);
        let bias = rand_vec(cout, 3);
        let r = rand_vec(2 * cout * g.out_len(), 4);
        let loss = |x: &[f64], w: &[f64], b: &[f64]| dot(&conv3d_forward(x, 2, w, b, &g), &r);
        let (dx, dw, db) = conv3d_backward(&x, 2, &w, cout, &r, &g, true);
        let (dx, dw, db) = (dx.unwrap(), dw, db);
        let ux = rand_vec(x.len(), 5);
        close(dot(&dx, &ux), directional(&|v| loss(v, &w, &bias), &x, &ux));
        let uw = rand_vec(w.len(), 6);
        close(dot(&dw, &uw), directional(&|v| loss(&x, v, &bias), &w, &uw));
        let ub = rand_vec(bias.len(), 7);
        close(dot(&db, &ub), directional(&|v| loss(&x, &w, v), &bias, &ub));
    }

    #[test]
    fn conv_transpose_is_adjoint_and_differentiates() {
        let g = ConvGeom::new(3, 3, [2, 2, 2], [4, 4, 6]);
        let cin = 2;
        assert_eq!(g.out_dims, [2, 2, 3]);
        let x = rand_vec(cin * g.out_len(), 8);
        let w = rand_vec(cin * g.col_rows(), 9);
        let zero = vec![0.0; 3];
        // <convT(x), y> == <x, conv(y)> with the same weights, no bias
        let y = rand_vec(3 * g.in_len(), 10);
        let lhs = dot(&conv_t_forward(&x, 1, &w, &zero, &g), &y);
        let rhs = dot(&x, &conv3d_forward(&y, 1, &w, &[0.0; 2], &g));
        close(lhs, rhs);

        let bias = rand_vec(3, 11);
        let r = rand_vec(3 * g.in_len(), 12);
        let loss = |x: &[f64], w: &[f64], b: &[f64]| dot(&conv_t_forward(x, 1, w, b, &g), &r);
        let (dx, dw, db) = conv_t_backward(&x, 1, &w, &r, &g);
        let u = rand_vec(x.len(), 13);
        close(dot(&dx, &u), directional(&|v| loss(v, &w, &bias), &x, &u));
        let u = rand_vec(w.len(), 14);
        close(dot(&dw, &u), directional(&|v| loss(&x, v, &bias), &w, &u));
        let u = rand_vec(3, 15);
        close(dot(&db, &u), directional(&|v| loss(&x, &w, v), &bias, &u));
    }

    #[test]
    fn batchnorm_gradients_and_stats() {
        let (batch, ch) = (3, 2);
        let x = rand_vec(batch * ch * 5, 16);
        let gamma = rand_vec(ch, 17);
        let beta = rand_vec(ch, 18);
        let r = rand_vec(x.len(), 19);
        let (y, cache) = bn_forward(&x, batch, ch, &[1.0, 1.0], &[0.0, 0.0], None);
        for c in 0..ch {
            let vals: Vec<f64> = (0..batch).flat_map(|b| y[(b * ch + c) * 5..(b * ch + c + 1) * 5].to_vec()).collect();
            let mean = vals.iter().sum::<f64>() / 15.0;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 15.0;
            assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-3);
        }
        assert_eq!(cache.mean.len(), 2);
        let loss = |x: &[f64], g: &[f64], b: &[f64]| dot(&bn_forward(x, batch, ch, g, b, None).0, &r);
        let (_, cache) = bn_forward(&x, batch, ch, &gamma, &beta, None);
        let (dx, dg, db) = bn_backward(&r, batch, ch, &gamma, &cache);
        let u = rand_vec(x.len(), 20);
        close(dot(&dx, &u), directional(&|v| loss(v, &gamma, &beta), &x, &u));
        let u = rand_vec(ch, 21);
        close(dot(&dg, &u), directional(&|v| loss(&x, v, &beta), &gamma, &u));
        close(dot(&db, &u), directional(&|v| loss(&x, &gamma, v), &beta, &u));
        // running statistics
        let rm = [0.1, -0.2];
        let rv = [2.0, 0.5];
        let loss = |x: &[f64]| dot(&bn_forward(x, batch, ch, &gamma, &beta, Some((&rm, &rv))).0, &r);
        let (_, cache) = bn_forward(&x, batch, ch, &gamma, &beta, Some((&rm, &rv)));
        let (dx, _, _) = bn_backward(&r, batch, ch, &gamma, &cache);
        let u = rand_vec(x.len(), 22);
        close(dot(&dx, &u), directional(&loss, &x, &u));
    }

    #[test]
    fn linear_gradients() {
        let (rows, inp, out) = (4, 3, 5);
        let x = rand_vec(rows * inp, 23);
        let w = rand_vec(out * inp, 24);
        let b = rand_vec(out, 25);
        let r = rand_vec(rows * out, 26);
        let y = linear_forward(&x, rows, &w, &b);
        close(y[out + 2], (0..inp).map(|i| x[inp + i] * w[2 * inp + i]).sum::<f64>() + b[2]);
        let loss = |x: &[f64], w: &[f64], b: &[f64]| dot(&linear_forward(x, rows, w, b), &r);
        let (dx, dw, db) = linear_backward(&x, rows, &w, &r);
        let u = rand_vec(x.len(), 27);
        close(dot(&dx, &u), directional(&|v| loss(v, &w, &b), &x, &u));
        let u = rand_vec(w.len(), 28);
        close(dot(&dw, &u), directional(&|v| loss(&x, v, &b), &w, &u));
        let u = rand_vec(b.len(), 29);
        close(dot(&db, &u), directional(&|v| loss(&x, &w, v), &b, &u));
    }

    #[test]
    fn lstm_gradients_both_directions() {
        let (batch, steps, inp, h) = (2, 5, 3, 4);
        let x = rand_vec(batch * steps * inp, 30);
        let w_ih = rand_vec(4 * h * inp, 31);
        let w_hh = rand_vec(4 * h * h, 32);
        let bias = rand_vec(4 * h, 33);
        let r = rand_vec(batch * steps * h, 34);
        for reverse in [false, true] {
            let loss = |x: &[f64], a: &[f64], b: &[f64], c: &[f64]| dot(&lstm_forward(x, batch, steps, a, b, c, reverse).hidden, &r);
            let cache = lstm_forward(&x, batch, steps, &w_ih, &w_hh, &bias, reverse);
            let (dx, dwi, dwh, db) = lstm_backward(&x, batch, steps, &w_ih, &w_hh, &cache, &r, reverse);
            let u = rand_vec(x.len(), 35);
            close(dot(&dx, &u), directional(&|v| loss(v, &w_ih, &w_hh, &bias), &x, &u));
            let u = rand_vec(w_ih.len(), 36);
            close(dot(&dwi, &u), directional(&|v| loss(&x, v, &w_hh, &bias), &w_ih, &u));
            let u = rand_vec(w_hh.len(), 37);
            close(dot(&dwh, &u), directional(&|v| loss(&x, &w_ih, v, &bias), &w_hh, &u));
            let u = rand_vec(bias.len(), 38);
            close(dot(&db, &u), directional(&|v| loss(&x, &w_ih, &w_hh, v), &bias, &u));
        }
    }

    #[test]
    fn lstm_reverse_matches_forward_on_reversed_input() {
        let (batch, steps, inp, h) = (1, 6, 2, 3);
        let x = rand_vec(steps * inp, 39);
        let w_ih = rand_vec(4 * h * inp, 40);
        let w_hh = rand_vec(4 * h * h, 41);
        let bias = rand_vec(4 * h, 42);
        let xr: Vec<f64> = x.chunks(inp).rev().flatten().copied().collect();
        let a = lstm_forward(&x, batch, steps, &w_ih, &w_hh, &bias, true).hidden;
        let b = lstm_forward(&xr, batch, steps, &w_ih, &w_hh, &bias, false).hidden;
        let br: Vec<f64> = b.chunks(h).rev().flatten().copied().collect();
        for (p, q) in a.iter().zip(&br) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn upsample_interpolates_and_differentiates() {
        let x = vec![0.0, 1.0, 4.0, 2.0];
        let y = upsample_linear(&x, 1, 4, 8);
        // half-pixel centers: dst t maps to src (t + 0.5) / 2 - 0.5
        assert_eq!(y[0], 0.0);
        assert!((y[1] - 0.25).abs() < 1e-12);
        assert!((y[2] - 0.75).abs() < 1e-12);
        assert_eq!(y[7], 2.0);
        let r = rand_vec(2 * 10, 43);
        let x = rand_vec(2 * 3, 44);
        let dx = upsample_linear_backward(&r, 2, 3, 10);
        let u = rand_vec(6, 45);
        close(dot(&dx, &u), directional(&|v| dot(&upsample_linear(v, 2, 3, 10), &r), &x, &u));
    }

    #[test]
    fn nearest_upsample_repeats() {
        let y = upsample_nearest(&[1.0, 2.0, 3.0, 4.0], 2, 2, 6);
        assert_eq!(y, vec![1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 3.0, 3.0, 3.0, 4.0, 4.0, 4.0]);
        let dx = upsample_nearest_backward(&y, 2, 2, 6);
        assert_eq!(dx, vec![3.0, 6.0, 9.0, 12.0]);
    }

    #[test]
    fn dropout_scales_kept_units() {
        let mut x = vec![1.0; 10_000];
        let mask = dropout_inplace(&mut x, 0.25, &mut seeded(0, 0));
        let kept = mask.iter().filter(|&&m| m > 0.0).count() as f64;
        assert!((kept / 10_000.0 - 0.75).abs() < 0.02);
        assert!(x.iter().all(|&v| v == 0.0 || (v - 4.0 / 3.0).abs() < 1e-12));
    }
}
