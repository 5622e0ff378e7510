use super::config::ModelConfig;
use super::network::{forward, probabilities, RunMode};
use super::params::ModelParams;
use crate::dsp::{detect_peaks, rate_from_peaks};
use crate::error::{Error, Result};
use crate::signal::TimeSeries;
use crate::video::{Mask, Video};

/// Minimum peak spacing used when converting a predicted signal to a rate.
pub const INFER_MIN_PEAK_DISTANCE: usize = 40;

/// Per-frame model outputs over a whole video. ROI maps are probabilities,
/// `[T, H, W]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelOutput {
    pub signal_local: Vec<f64>,
    pub signal_global: Vec<f64>,
    pub roi_local: Vec<f64>,
    pub roi_global: Vec<f64>,
}

/// Start frames of the clips covering `len` frames; the last clip is
/// aligned to the end and may overlap its predecessor.
pub fn clip_starts(len: usize, clip: usize) -> Vec<usize> {
    let mut starts: Vec<usize> = (0..len / clip).map(|i| i * clip).collect();
    if len % clip != 0 {
        starts.push(len - clip);
    }
    starts
}

/// Runs the network in inference mode over a video of any length (at least
/// one clip). Later clips overwrite the overlap with earlier ones.
pub fn predict(params: &ModelParams, cfg: &ModelConfig, video: &Video) -> Result<ModelOutput> {
    if video.width != cfg.width || video.height != cfg.height {
        return Err(Error::Parameter(format!(
            "video is {}x{}, model expects {}x{}",
            video.width, video.height, cfg.width, cfg.height
        )));
    }
    if video.num_frames < cfg.frames {
        return Err(Error::Parameter(format!(
            "video has {} frames, model needs at least {}",
            video.num_frames, cfg.frames
        )));
    }
    let hw = cfg.width * cfg.height;
    let n = video.num_frames;
    let mut out = ModelOutput {
        signal_local: vec![0.0; n],
        signal_global: vec![0.0; n],
        roi_local: vec![0.0; n * hw],
        roi_global: vec![0.0; n * hw],
    };
    for start in clip_starts(n, cfg.frames) {
        let end = start + cfg.frames;
        let frames: Vec<f64> = video.data[start * hw..end * hw].iter().map(|&v| v as f64).collect();
        let (o, _, _) = forward(params, cfg, &frames, 1, RunMode::eval())?;
        out.signal_local[start..end].copy_from_slice(&o.signal_local);
        out.signal_global[start..end].copy_from_slice(&o.signal_global);
        out.roi_local[start * hw..end * hw].copy_from_slice(&probabilities(&o.roi_local));
        out.roi_global[start * hw..end * hw].copy_from_slice(&probabilities(&o.roi_global));
    }
    Ok(out)
}

/// Thresholds probability maps `[T, H, W]` at 0.5.
pub fn threshold_maps(maps: &[f64], width: usize, height: usize) -> Vec<Mask> {
    maps.chunks(width * height)
        .map(|f| Mask {
            width,
            height,
            bits: f.iter().map(|&p| p > 0.5).collect(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateInference {
    pub output: ModelOutput,
    pub signal: TimeSeries,
    pub roi: Vec<Mask>,
    pub peaks: Vec<usize>,
    pub rate_bpm: f64,
}

/// Global-pathway signal, its thresholded ROI, and the rate from its peaks.
pub fn infer_rate(params: &ModelParams, cfg: &ModelConfig, video: &Video) -> Result<RateInference> {
    let output = predict(params, cfg, video)?;
    let signal = TimeSeries::new(output.signal_global.clone(), video.fs)?;
    let roi = threshold_maps(&output.roi_global, cfg.width, cfg.height);
    let peaks = detect_peaks(&signal.values, INFER_MIN_PEAK_DISTANCE);
    let rate_bpm = rate_from_peaks(&peaks, video.fs)?;
    Ok(RateInference {
        output,
        signal,
        roi,
        peaks,
        rate_bpm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clips_cover_the_video() {
        assert_eq!(clip_starts(512, 256), vec![0, 256]);
        assert_eq!(clip_starts(600, 256), vec![0, 256, 344]);
        assert_eq!(clip_starts(256, 256), vec![0]);
    }
}
