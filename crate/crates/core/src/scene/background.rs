use rand::Rng;

use super::VideoConfig;

/// Slowly drifting background: low-resolution keyframes drawn from U[0, 1]
/// every `bg_keyframe_stride` frames, bilinearly upsampled, and linearly
/// interpolated in time.
#[derive(Debug, Clone)]
pub struct Background {
    width: usize,
    height: usize,
    stride: usize,
    keyframes: Vec<Vec<f64>>,
}

impl Background {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, cfg: &VideoConfig) -> Self {
        let (bw, bh) = cfg.bg_lowres;
        let stride = cfg.bg_keyframe_stride.max(1);
        let n_keys = (cfg.num_frames.saturating_sub(1)).div_ceil(stride) + 1;
        let keyframes = (0..n_keys)
            .map(|_| {
                let low: Vec<f64> = (0..bw * bh).map(|_| rng.gen_range(0.0..=1.0)).collect();
                upsample_bilinear(&low, bw, bh, cfg.width, cfg.height)
            })
            .collect();
        Self {
            width: cfg.width,
            height: cfg.height,
            stride,
            keyframes,
        }
    }

    /// Builds a background from explicit full-resolution keyframes.
    pub fn from_keyframes(width: usize, height: usize, stride: usize, keyframes: Vec<Vec<f64>>) -> Self {
        assert!(!keyframes.is_empty() && stride > 0);
        Self {
            width,
            height,
            stride,
            keyframes,
        }
    }

    pub fn keyframe(&self, k: usize) -> &[f64] {
        &self.keyframes[k]
    }

    pub fn frame(&self, t: usize) -> Vec<f64> {
        let k0 = (t / self.stride).min(self.keyframes.len() - 1);
        let k1 = (k0 + 1).min(self.keyframes.len() - 1);
        let w = (t - k0 * self.stride) as f64 / self.stride as f64;
        if w == 0.0 || k0 == k1 {
            return self.keyframes[k0].clone();
        }
        self.keyframes[k0]
            .iter()
            .zip(&self.keyframes[k1])
            .map(|(a, b)| (1.0 - w) * a + w * b)
            .collect()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

/// Samples the background and renders all frames.
pub fn generate_background<R: Rng + ?Sized>(rng: &mut R, cfg: &VideoConfig) -> Vec<Vec<f64>> {
    let bg = Background::sample(rng, cfg);
    (0..cfg.num_frames).map(|t| bg.frame(t)).collect()
}

/// Bilinear resize with pixel-center alignment and edge clamping.
pub fn upsample_bilinear(src: &[f64], sw: usize, sh: usize, dw: usize, dh: usize) -> Vec<f64> {
    let coord = |d: usize, dn: usize, sn: usize| -> (usize, usize, f64) {
        let s = ((d as f64 + 0.5) * sn as f64 / dn as f64 - 0.5).clamp(0.0, (sn - 1) as f64);
        let i0 = s.floor() as usize;
        let i1 = (i0 + 1).min(sn - 1);
        (i0, i1, s - i0 as f64)
    };
    let mut out = Vec::with_capacity(dw * dh);
    for y in 0..dh {
        let (y0, y1, fy) = coord(y, dh, sh);
        for x in 0..dw {
            let (x0, x1, fx) = coord(x, dw, sw);
            let top = (1.0 - fx) * src[y0 * sw + x0] + fx * src[y0 * sw + x1];
            let bottom = (1.0 - fx) * src[y1 * sw + x0] + fx * src[y1 * sw + x1];
            out.push((1.0 - fy) * top + fy * bottom);
        }
    }
    out
}
