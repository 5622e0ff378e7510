//! Synthetic training videos: moving ellipses whose intensities follow a
//! target signal (objects of interest) or out-of-prior signals
//! (distractors), over a drifting background, blurred and speckled with
//! salt-and-pepper noise.

mod background;
mod compose;
mod raster;
mod track;

pub use background::{generate_background, upsample_bilinear, Background};
pub use compose::compose_frame;
pub use raster::{rasterize_ellipse, rasterize_scene_masks};
pub use track::{sample_ellipse_track, step_ellipse, EllipseState, EllipseTrack, MotionNoise, Role};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::signal::{sample_signal_spec, FrequencyRange, SignalAugmentation, TimeSeries};
use crate::video::{Mask, Video};

// Independent random streams per generation stage.
const STREAM_LAYOUT: u64 = 0;
const STREAM_BACKGROUND: u64 = 1;
const STREAM_MOTION: u64 = 2;
const STREAM_SIGNAL: u64 = 3;
const STREAM_PIXELS: u64 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VideoConfig {
    pub width: usize,
    pub height: usize,
    pub num_frames: usize,
    pub fs: f64,
    pub n_interest: usize,
    pub n_distractors: usize,
    pub blur_sigma: f64,
    pub sp_density: f64,
    pub bg_lowres: (usize, usize),
    pub bg_keyframe_stride: usize,
    pub target_range: FrequencyRange,
    pub seed: u64,
    pub signal: SignalAugmentation,
    pub motion: MotionNoise,
}

impl Default for VideoConfig {
    fn default() -> Self {
        Self {
            width: 64,
            height: 64,
            num_frames: 256,
            fs: 27.0,
            n_interest: 1,
            n_distractors: 2,
            blur_sigma: 1.0,
            sp_density: 0.01,
            bg_lowres: (4, 4),
            bg_keyframe_stride: 100,
            target_range: FrequencyRange {
                min_hz: 0.24,
                max_hz: 0.54,
            },
            seed: 0,
            signal: SignalAugmentation::default(),
            motion: MotionNoise::default(),
        }
    }
}

impl VideoConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Parameter(m));
        if self.width < 16 || self.height < 16 {
            return fail(format!("frame {}x{} is smaller than 16x16", self.width, self.height));
        }
        if self.num_frames < 2 {
            return fail("num_frames must be at least 2".into());
        }
        if !(self.fs.is_finite() && self.fs > 0.0) {
            return fail(format!("fs {} must be positive", self.fs));
        }
        if self.n_interest < 1 {
            return fail("n_interest must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.sp_density) {
            return fail(format!("sp_density {} must lie in [0, 1)", self.sp_density));
        }
        if !(self.blur_sigma >= 0.0) {
            return fail(format!("blur_sigma {} must be non-negative", self.blur_sigma));
        }
        if self.bg_lowres.0 == 0 || self.bg_lowres.1 == 0 || self.bg_keyframe_stride == 0 {
            return fail("background grid and keyframe stride must be positive".into());
        }
        let m = &self.motion;
        if !(m.size_std >= 0.0 && m.angle_std >= 0.0 && m.pos_std >= 0.0) {
            return fail("motion noise must be non-negative".into());
        }
        self.target_range.validate()?;
        self.signal.validate()
    }
}

/// A rendered video with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoSample {
    pub config: VideoConfig,
    pub frames: Video,
    /// Target signal value actually rendered at each frame.
    pub gt_signal: TimeSeries,
    /// Analytic rate of the target signal, cycles per minute.
    pub gt_rate: f64,
    /// Union of interest masks per frame, as used for composition.
    pub gt_masks: Vec<Mask>,
    pub tracks: Vec<EllipseTrack>,
}

/// Renders a full video from its config. Pure function of `cfg`, seed included.
///
/// All objects of interest share one target signal; each distractor gets its
/// own out-of-prior signal. Objects of interest are sampled first, so they
/// hold the lowest z-orders and are never occluded by distractors.
pub fn generate_video(cfg: &VideoConfig) -> Result<VideoSample> {
    cfg.validate()?;
    let (w, h, n) = (cfg.width, cfg.height, cfg.num_frames);

    let mut layout = seeded(cfg.seed, STREAM_LAYOUT);
    let target = sample_signal_spec(&mut layout, &cfg.target_range, cfg.fs, n, &cfg.signal)?;
    let mut tracks = Vec::with_capacity(cfg.n_interest + cfg.n_distractors);
    for k in 0..cfg.n_interest + cfg.n_distractors {
        let role = if k < cfg.n_interest {
            Role::Interest
        } else {
            Role::Distractor
        };
        let mut track = sample_ellipse_track(&mut layout, cfg, role, k as u32)?;
        if role == Role::Interest {
            track.signal = target.clone();
        }
        tracks.push(track);
    }

    let background = Background::sample(&mut seeded(cfg.seed, STREAM_BACKGROUND), cfg);

    // signal values are rounded to the stored pixel precision so the ground
    // truth matches the rendered intensities bit for bit
    let mut signal_rng = seeded(cfg.seed, STREAM_SIGNAL);
    let target_series = target.render(n, cfg.fs, &mut signal_rng)?;
    let to_pixel = |v: f64| v as f32 as f64;
    let mut track_values: Vec<Vec<f64>> = Vec::with_capacity(tracks.len());
    for track in &tracks {
        let series = match track.role {
            Role::Interest => target_series.clone(),
            Role::Distractor => track.signal.render(n, cfg.fs, &mut signal_rng)?,
        };
        track_values.push(series.values.into_iter().map(to_pixel).collect());
    }
    let gt_signal = TimeSeries::new(target_series.values.into_iter().map(to_pixel).collect(), cfg.fs)?;

    let mut motion = seeded(cfg.seed, STREAM_MOTION);
    let mut pixels = seeded(cfg.seed, STREAM_PIXELS);
    let mut states: Vec<EllipseState> = tracks.iter().map(EllipseTrack::initial_state).collect();
    let mut frames = Video::zeros(w, h, n, cfg.fs);
    let mut gt_masks = Vec::with_capacity(n);

    for t in 0..n {
        if t > 0 {
            for (state, track) in states.iter_mut().zip(&tracks) {
                *state = step_ellipse(state, track.end_pos, t, n, (w, h), &cfg.motion, &mut motion);
            }
        }
        let layers: Vec<(u32, EllipseState)> = tracks.iter().zip(&states).map(|(tr, s)| (tr.z_order, *s)).collect();
        let masks = rasterize_scene_masks(&layers, w, h);

        let mut interest = Mask::empty(w, h);
        for (m, tr) in masks.iter().zip(&tracks) {
            if tr.role == Role::Interest {
                interest.union_with(m);
            }
        }
        let lit: Vec<(&Mask, f64)> = masks.iter().zip(&track_values).map(|(m, v)| (m, v[t])).collect();
        let frame = compose_frame(&lit, &background.frame(t), w, h, cfg.blur_sigma, cfg.sp_density, &mut pixels)?;
        frames.frame_mut(t).copy_from_slice(&frame);
        gt_masks.push(interest);
    }

    Ok(VideoSample {
        config: cfg.clone(),
        frames,
        gt_rate: target.rate_bpm(cfg.fs),
        gt_signal,
        gt_masks,
        tracks,
    })
}
