use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::VideoConfig;
use crate::error::Result;
use crate::signal::{sample_distractor_spec, sample_signal_spec, SignalSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Interest,
    Distractor,
}

/// Geometry of one ellipse at one frame. Positions are `(x, y)` in pixels,
/// axes are semi-axes along the ellipse's own x and y before rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseState {
    pub pos: [f64; 2],
    pub axes: [f64; 2],
    pub angle_deg: f64,
}

/// One moving blob for the whole video.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipseTrack {
    pub start_pos: [f64; 2],
    pub end_pos: [f64; 2],
    pub axes: [f64; 2],
    pub angle_deg: f64,
    /// Lower values are drawn on top.
    pub z_order: u32,
    pub role: Role,
    pub signal: SignalSpec,
}

impl EllipseTrack {
    pub fn initial_state(&self) -> EllipseState {
        EllipseState {
            pos: self.start_pos,
            axes: self.axes,
            angle_deg: self.angle_deg,
        }
    }
}

/// Per-frame jitter strengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MotionNoise {
    /// Std of the multiplicative size factor around 1.
    pub size_std: f64,
    /// Std of the multiplicative angle factor around 1.
    pub angle_std: f64,
    /// Std of the additive position noise, pixels.
    pub pos_std: f64,
}

impl Default for MotionNoise {
    fn default() -> Self {
        Self {
            size_std: 0.1,
            angle_std: 0.1,
            pos_std: 1.0,
        }
    }
}

impl MotionNoise {
    pub fn none() -> Self {
        Self {
            size_std: 0.0,
            angle_std: 0.0,
            pos_std: 0.0,
        }
    }
}

/// Samples start/end positions uniformly over the frame, semi-axes uniform in
/// `[1, dim/4]`, angle uniform in `[0, 360)`, and a signal from the target
/// prior (interest) or outside it (distractor).
pub fn sample_ellipse_track<R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &VideoConfig,
    role: Role,
    z_order: u32,
) -> Result<EllipseTrack> {
    let (w, h) = (cfg.width as f64, cfg.height as f64);
    let start_pos = [rng.gen_range(0.0..w), rng.gen_range(0.0..h)];
    let end_pos = [rng.gen_range(0.0..w), rng.gen_range(0.0..h)];
    let axes = [rng.gen_range(1.0..=w / 4.0), rng.gen_range(1.0..=h / 4.0)];
    let angle_deg = rng.gen_range(0.0..360.0);
    let signal = match role {
        Role::Interest => sample_signal_spec(rng, &cfg.target_range, cfg.fs, cfg.num_frames, &cfg.signal)?,
        Role::Distractor => sample_distractor_spec(rng, &cfg.target_range, cfg.fs, cfg.num_frames, &cfg.signal)?,
    };
    Ok(EllipseTrack {
        start_pos,
        end_pos,
        axes,
        angle_deg,
        z_order,
        role,
        signal,
    })
}

/// Advances a track from frame `t - 1` to `t`.
///
/// Axes and angle are scaled by independent factors drawn from
/// `N(1, size_std)` / `N(1, angle_std)`; the position follows the recursive
/// blend `((T - t)/T) prev + (t/T) end + N(0, pos_std)`. Axes are clamped to
/// `[1, dim/2]` and positions to the frame.
#[allow(clippy::too_many_arguments)]
pub fn step_ellipse<R: Rng + ?Sized>(
    prev: &EllipseState,
    end_pos: [f64; 2],
    t: usize,
    num_frames: usize,
    dims: (usize, usize),
    noise: &MotionNoise,
    rng: &mut R,
) -> EllipseState {
    let size = Normal::new(1.0, noise.size_std).expect("size std");
    let angle = Normal::new(1.0, noise.angle_std).expect("angle std");
    let pos = Normal::new(0.0, noise.pos_std).expect("position std");
    let limits = [dims.0 as f64, dims.1 as f64];
    let big_t = num_frames as f64;
    let t = t as f64;

    let mut next = *prev;
    for i in 0..2 {
        next.axes[i] = (prev.axes[i] * size.sample(rng)).clamp(1.0, (limits[i] / 2.0).max(1.0));
    }
    next.angle_deg = prev.angle_deg * angle.sample(rng);
    for i in 0..2 {
        let blended = (big_t - t) / big_t * prev.pos[i] + t / big_t * end_pos[i] + pos.sample(rng);
        next.pos[i] = blended.clamp(0.0, limits[i]);
    }
    next
}
