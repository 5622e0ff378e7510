#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use vsynth::dsp::magnitude_spectrum;
use vsynth::io::{Checkpoint, RunConfig};
use vsynth::model::{infer_rate, predict, threshold_maps, ModelConfig, ModelParams, TrainState};
use vsynth::rng::seeded;
use vsynth::{generate_video, Mask, VideoConfig, VideoSample};

/// Seeds of held-out videos start here; the training stream mixes its seed
/// through splitmix64, so small consecutive seeds never collide with it.
pub const HELD_OUT_SEED: u64 = 1_000_000;

pub fn assets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../assets")
}

pub fn desk_config() -> RunConfig {
    let text = std::fs::read_to_string(assets().join("desk.toml")).expect("assets/desk.toml");
    RunConfig::from_toml(&text).expect("desk config")
}

pub fn load_desk_model() -> Result<(ModelConfig, ModelParams, u64), String> {
    let path = assets().join("desk.vsnp");
    let ckpt = Checkpoint::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let (cfg, state) = TrainState::from_checkpoint(&ckpt).map_err(|e| e.to_string())?;
    Ok((cfg, state.params.clone(), state.step()))
}

pub fn held_out(video: &VideoConfig, count: usize) -> Vec<VideoSample> {
    (0..count)
        .map(|i| {
            generate_video(&VideoConfig {
                seed: HELD_OUT_SEED + i as u64,
                ..video.clone()
            })
            .expect("held-out video")
        })
        .collect()
}

pub struct HeldOutScore {
    pub rate_errors: Vec<f64>,
    pub insufficient: usize,
    pub mean_iou: f64,
    pub control_iou: f64,
    /// Samples whose predicted signal peaks in the target's DFT bin (±1).
    pub dominant_hits: usize,
}

/// Random mask with the same pixel count as `like`.
pub fn random_mask(like: &Mask, rng: &mut impl rand::Rng) -> Mask {
    let mut idx: Vec<usize> = (0..like.bits.len()).collect();
    idx.shuffle(rng);
    let mut m = Mask::empty(like.width, like.height);
    for &i in &idx[..like.count()] {
        m.bits[i] = true;
    }
    m
}

/// Strongest non-DC one-sided DFT bin of the mean-removed series.
pub fn dominant_frequency_bin(values: &[f64]) -> usize {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let mags = magnitude_spectrum(&centered);
    (1..mags.len()).fold(1, |best, k| if mags[k] > mags[best] { k } else { best })
}

pub fn score_held_out(cfg: &ModelConfig, params: &ModelParams, samples: &[VideoSample]) -> HeldOutScore {
    let mut rng = seeded(99, 0);
    let mut s = HeldOutScore {
        rate_errors: Vec::new(),
        insufficient: 0,
        mean_iou: 0.0,
        control_iou: 0.0,
        dominant_hits: 0,
    };
    let mut frames = 0usize;
    for sample in samples {
        let n = sample.frames.num_frames;
        let fs = sample.frames.fs;
        let (signal, roi) = match infer_rate(params, cfg, &sample.frames) {
            Ok(r) => {
                s.rate_errors.push((r.rate_bpm - sample.gt_rate).abs());
                (r.signal.values, r.roi)
            }
            Err(vsynth::Error::InsufficientPeaks { .. }) => {
                // scored like the evaluation harness: a missing rate counts as 0
                s.insufficient += 1;
                s.rate_errors.push(sample.gt_rate);
                let out = predict(params, cfg, &sample.frames).expect("predict");
                (out.signal_global, threshold_maps(&out.roi_global, cfg.width, cfg.height))
            }
            Err(e) => panic!("inference failed: {e}"),
        };
        let target_bin = sample.gt_rate / 60.0 * n as f64 / fs;
        if (dominant_frequency_bin(&signal) as f64 - target_bin).abs() <= 1.0 {
            s.dominant_hits += 1;
        }
        for (pred, gt) in roi.iter().zip(&sample.gt_masks) {
            s.mean_iou += pred.iou(gt);
            s.control_iou += random_mask(pred, &mut rng).iou(gt);
            frames += 1;
        }
    }
    s.mean_iou /= frames as f64;
    s.control_iou /= frames as f64;
    s
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn vsynth_cmd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vsynth"))
        .args(args)
        .env_remove(vsynth::io::SEED_ENV)
        .output()
        .expect("running vsynth")
}

/// Every regular file under `dir` with its contents, sorted by relative path.
pub fn dir_contents(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}
