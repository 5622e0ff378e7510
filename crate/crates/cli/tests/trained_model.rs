//! Properties of the shipped desk checkpoint (assets/desk.vsnp).

mod common;

use common::{desk_config, held_out, load_desk_model, HELD_OUT_SEED};
use vsynth::dsp::detect_peaks;
use vsynth::model::{infer_rate, predict, INFER_MIN_PEAK_DISTANCE};
use vsynth::{generate_video, FrequencyRange, VideoConfig};

/// Fraction of global-pathway peaks with a local-pathway peak within `tol` frames.
fn peak_agreement(local: &[f64], global: &[f64], tol: usize) -> (usize, usize) {
    let lp = detect_peaks(local, INFER_MIN_PEAK_DISTANCE);
    let gp = detect_peaks(global, INFER_MIN_PEAK_DISTANCE);
    let matched = gp.iter().filter(|&&g| lp.iter().any(|&l| l.abs_diff(g) <= tol)).count();
    (matched, gp.len())
}

#[test]
fn local_and_global_peaks_agree_on_noiseless_videos() {
    let (cfg, params, _) = load_desk_model().unwrap();
    let video = VideoConfig {
        sp_density: 0.0,
        ..desk_config().video
    };
    let (mut matched, mut total) = (0, 0);
    for sample in held_out(&video, 10) {
        let out = predict(&params, &cfg, &sample.frames).unwrap();
        let (m, t) = peak_agreement(&out.signal_local, &out.signal_global, 5);
        matched += m;
        total += t;
    }
    assert!(total > 0);
    let frac = matched as f64 / total as f64;
    assert!(frac >= 0.8, "{matched}/{total} global peaks matched by a local peak");
}

#[test]
fn held_out_video_at_0_3_hz_reads_18_bpm() {
    let (cfg, params, _) = load_desk_model().unwrap();
    for i in 0..5 {
        let video = VideoConfig {
            n_distractors: 0,
            target_range: FrequencyRange::new(0.3, 0.3).unwrap(),
            seed: HELD_OUT_SEED + 500 + i,
            ..desk_config().video
        };
        let sample = generate_video(&video).unwrap();
        let r = infer_rate(&params, &cfg, &sample.frames).unwrap();
        assert!((r.rate_bpm - 18.0).abs() <= 2.0, "seed {}: {} BPM", video.seed, r.rate_bpm);
    }
}
