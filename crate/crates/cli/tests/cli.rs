mod common;

use std::fs;
use std::path::Path;

use vsynth::io::{Checkpoint, Sidecar};
use vsynth::model::TrainState;

use common::{dir_contents, vsynth_cmd};

const SMALL: &str = r#"
[video]
width = 32
height = 32
num_frames = 64
seed = 5

[model]
frames = 64
height = 32
width = 32
channels = 4
temporal_strides = [2, 2]
spatial_strides = [2, 2]
lstm_layers = 1
lstm_hidden = 8
batch_size = 2

[train]
steps = 4
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn generate_writes_videos_sidecars_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL);
    let out = tmp.path().join("gen");
    let run = vsynth_cmd(&["generate", "--config", &cfg, "--count", "3", "--out", p(&out)]);
    assert!(run.status.success(), "{}", stderr(&run));
    let files = dir_contents(&out);
    assert_eq!(files.len(), 7);
    assert_eq!(files.iter().filter(|(n, _)| n.extension().unwrap() == "vsv").count(), 3);
    assert_eq!(files.iter().filter(|(n, _)| n.extension().unwrap() == "json").count(), 3);

    let manifest = fs::read_to_string(out.join("manifest.tsv")).unwrap();
    let lines: Vec<&str> = manifest.lines().collect();
    assert_eq!(lines.len(), 3);
    for (i, line) in lines.iter().enumerate() {
        let cols: Vec<&str> = line.split('\t').collect();
        assert_eq!(cols[0], format!("sample_{i:05}.vsv"));
        assert_eq!(cols[1].len(), 64);
        let sidecar = Sidecar::read(&out.join(format!("sample_{i:05}.json"))).unwrap();
        assert_eq!(cols[2].parse::<f64>().unwrap(), sidecar.gt_rate);
        assert_eq!(sidecar.config.seed, 5 + i as u64);
    }
    let last = stdout(&run).lines().last().unwrap().to_string();
    assert!(last.starts_with("manifest {\"command\":\"generate\""), "{last}");
    assert_eq!(last.matches(".vsv").count(), 3);
}

#[test]
fn generate_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL);
    for d in ["a", "b"] {
        let run = vsynth_cmd(&["generate", "--config", &cfg, "--count", "2", "--out", p(&tmp.path().join(d))]);
        assert!(run.status.success());
    }
    assert_eq!(dir_contents(&tmp.path().join("a")), dir_contents(&tmp.path().join("b")));
}

#[test]
fn zero_count_gives_empty_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("gen");
    let run = vsynth_cmd(&["generate", "--count", "0", "--out", p(&out)]);
    assert!(run.status.success());
    let files = dir_contents(&out);
    assert_eq!(files.len(), 1);
    assert!(files[0].1.is_empty());
}

#[test]
fn seed_environment_variable_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL);
    let with_env = std::process::Command::new(env!("CARGO_BIN_EXE_vsynth"))
        .args(["generate", "--config", &cfg, "--count", "1", "--out", p(&tmp.path().join("env"))])
        .env(vsynth::io::SEED_ENV, "40")
        .output()
        .unwrap();
    assert!(with_env.status.success());
    let cfg40 = write_config(tmp.path(), "c40.toml", &SMALL.replace("seed = 5", "seed = 40"));
    assert!(vsynth_cmd(&["generate", "--config", &cfg40, "--count", "1", "--out", p(&tmp.path().join("cfg"))]).status.success());
    assert_eq!(dir_contents(&tmp.path().join("env")), dir_contents(&tmp.path().join("cfg")));

    let bad = std::process::Command::new(env!("CARGO_BIN_EXE_vsynth"))
        .args(["generate", "--config", &cfg, "--count", "1", "--out", p(&tmp.path().join("bad"))])
        .env(vsynth::io::SEED_ENV, "forty")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn unknown_config_keys_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", "[video]\nwidht = 32\n");
    let run = vsynth_cmd(&["generate", "--config", &cfg, "--count", "1", "--out", p(&tmp.path().join("g"))]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains("widht"), "{}", stderr(&run));
    assert!(!tmp.path().join("g").exists());
}

#[test]
fn missing_input_exits_2_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("an");
    let run = vsynth_cmd(&["analyze", "--input", p(&tmp.path().join("nope.vsv")), "--boxes", "b.csv", "--out", p(&out)]);
    assert_eq!(run.status.code(), Some(2));
    assert!(!out.exists());
    assert!(!stdout(&run).contains("manifest"));
}

#[test]
fn malformed_boxes_name_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL);
    let gen = tmp.path().join("gen");
    assert!(vsynth_cmd(&["generate", "--config", &cfg, "--count", "1", "--out", p(&gen)]).status.success());
    let boxes = tmp.path().join("boxes.csv");
    let mut text = String::new();
    for t in 0..64 {
        text.push_str(if t == 6 { "1,2,three,4\n" } else { "4,4,20,20\n" });
    }
    fs::write(&boxes, text).unwrap();
    let out = tmp.path().join("an");
    let run = vsynth_cmd(&["analyze", "--input", p(&gen.join("sample_00000.vsv")), "--boxes", p(&boxes), "--out", p(&out)]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains("line 7"), "{}", stderr(&run));
    assert!(!out.exists());
}

#[test]
fn analyze_recovers_a_known_rate() {
    // 0.3 Hz over 1000 frames at 27 fps: nearest DFT bin is 11 * 27 / 1000 Hz
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "[video]\nnum_frames = 1000\nseed = 3\ntarget_range = { min_hz = 0.3, max_hz = 0.3 }\n",
    );
    let gen = tmp.path().join("gen");
    assert!(vsynth_cmd(&["generate", "--config", &cfg, "--count", "1", "--out", p(&gen)]).status.success());
    let video = gen.join("sample_00000.vsv");
    let sidecar = gen.join("sample_00000.json");

    let out = tmp.path().join("dft");
    let run = vsynth_cmd(&["analyze", "--input", p(&video), "--sidecar", p(&sidecar), "--band", "0.1:0.8", "--out", p(&out)]);
    assert!(run.status.success(), "{}", stderr(&run));
    let rate: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("rate.json")).unwrap()).unwrap();
    assert!((rate["rate_bpm"].as_f64().unwrap() - 17.82).abs() < 1e-9, "{rate}");

    let out = tmp.path().join("peaks");
    let run = vsynth_cmd(&[
        "analyze", "--input", p(&video), "--sidecar", p(&sidecar), "--method", "peaks", "--dump-stages", "--out", p(&out),
    ]);
    assert!(run.status.success(), "{}", stderr(&run));
    let rate: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("rate.json")).unwrap()).unwrap();
    let r = rate["rate_bpm"].as_f64().unwrap();
    // peak positions are integers, so a 90-frame period is known to about
    // one frame over the first-to-last span
    assert!((r - 18.0).abs() < 0.5, "{r}");
    for stage in ["raw", "detrended", "normalized", "filtered"] {
        assert!(out.join(format!("stage_{stage}.csv")).is_file());
    }
    let plot = fs::read_to_string(out.join("plot.csv")).unwrap();
    assert_eq!(plot.lines().count(), 2 + 1000);
}

fn train(dir: &Path, cfg: &str, out: &str, extra: &[&str]) -> std::process::Output {
    let mut args = vec!["train", "--config", cfg, "--out", out];
    args.extend_from_slice(extra);
    let _ = dir;
    vsynth_cmd(&args)
}

#[test]
fn zero_steps_writes_the_initialization() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL);
    let ck = tmp.path().join("m.vsnp");
    let run = train(tmp.path(), &cfg, p(&ck), &["--steps", "0"]);
    assert!(run.status.success(), "{}", stderr(&run));
    let model = vsynth::io::RunConfig::from_toml(SMALL).unwrap().model;
    let init = TrainState::new(&model).unwrap().to_checkpoint(&model).unwrap();
    assert_eq!(fs::read(&ck).unwrap(), init.encode());
    let csv = fs::read_to_string(tmp.path().join("m.vsnp.loss.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn training_is_reproducible_and_logs_every_step() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL);
    let (a, b) = (tmp.path().join("a.vsnp"), tmp.path().join("b.vsnp"));
    assert!(train(tmp.path(), &cfg, p(&a), &[]).status.success());
    assert!(train(tmp.path(), &cfg, p(&b), &[]).status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let csv_a = fs::read_to_string(tmp.path().join("a.vsnp.loss.csv")).unwrap();
    assert_eq!(csv_a, fs::read_to_string(tmp.path().join("b.vsnp.loss.csv")).unwrap());
    let rows: Vec<&str> = csv_a.lines().collect();
    assert_eq!(rows[0], "step,total,sig_local,sig_global,roi_local,roi_global");
    assert_eq!(rows.len(), 1 + 4);
    let (_, state) = TrainState::from_checkpoint(&Checkpoint::read(&a).unwrap()).unwrap();
    assert_eq!(state.step(), 4);
}

#[test]
fn resume_continues_the_same_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL);
    let full = tmp.path().join("full.vsnp");
    assert!(train(tmp.path(), &cfg, p(&full), &[]).status.success());
    let half = tmp.path().join("half.vsnp");
    assert!(train(tmp.path(), &cfg, p(&half), &["--steps", "2"]).status.success());
    let resumed = tmp.path().join("resumed.vsnp");
    let run = train(tmp.path(), &cfg, p(&resumed), &["--steps", "2", "--resume", p(&half)]);
    assert!(run.status.success(), "{}", stderr(&run));
    assert_eq!(fs::read(&full).unwrap(), fs::read(&resumed).unwrap());
    let tail = fs::read_to_string(tmp.path().join("resumed.vsnp.loss.csv")).unwrap();
    let full_csv = fs::read_to_string(tmp.path().join("full.vsnp.loss.csv")).unwrap();
    assert_eq!(tail.lines().skip(1).collect::<Vec<_>>(), full_csv.lines().skip(3).collect::<Vec<_>>());
}

#[test]
fn resume_with_a_different_model_is_a_schema_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL);
    let ck = tmp.path().join("m.vsnp");
    assert!(train(tmp.path(), &cfg, p(&ck), &["--steps", "1"]).status.success());
    let other = write_config(tmp.path(), "o.toml", &SMALL.replace("lstm_hidden = 8", "lstm_hidden = 6"));
    let run = train(tmp.path(), &other, p(&tmp.path().join("o.vsnp")), &["--resume", p(&ck)]);
    assert_eq!(run.status.code(), Some(2));
    assert!(!tmp.path().join("o.vsnp").exists());
}

#[test]
fn train_rejects_video_and_model_size_mismatch() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", &SMALL.replace("num_frames = 64", "num_frames = 80"));
    let run = train(tmp.path(), &cfg, p(&tmp.path().join("m.vsnp")), &[]);
    assert_eq!(run.status.code(), Some(2));
}

/// Untrained checkpoint plus a longer generated video for inference tests.
fn inference_fixture(dir: &Path, frames: usize) -> (String, String, String) {
    let cfg = write_config(dir, "c.toml", SMALL);
    let ck = dir.join("m.vsnp");
    assert!(train(dir, &cfg, p(&ck), &["--steps", "0"]).status.success());
    let long = write_config(dir, "long.toml", &SMALL.replace("num_frames = 64", &format!("num_frames = {frames}")));
    let gen = dir.join("gen");
    assert!(vsynth_cmd(&["generate", "--config", &long, "--count", "1", "--out", p(&gen)]).status.success());
    (
        p(&ck).to_string(),
        p(&gen.join("sample_00000.vsv")).to_string(),
        p(&gen.join("sample_00000.json")).to_string(),
    )
}

#[test]
fn infer_writes_signal_roi_and_rate() {
    let tmp = tempfile::tempdir().unwrap();
    let (ck, video, _) = inference_fixture(tmp.path(), 150);
    let out = tmp.path().join("inf");
    let run = vsynth_cmd(&["infer", "--checkpoint", &ck, "--input", &video, "--out", p(&out)]);
    assert!(run.status.success(), "{}", stderr(&run));
    assert_eq!(fs::read_to_string(out.join("signal.csv")).unwrap().lines().count(), 2 + 150);
    let roi: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("roi.json")).unwrap()).unwrap();
    assert_eq!(roi["masks_rle"].as_array().unwrap().len(), 150);
    let rate: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("rate.json")).unwrap()).unwrap();
    match rate["rate_bpm"].as_f64() {
        Some(r) => assert!(r > 0.0),
        None => assert!(stderr(&run).contains("no rate")),
    }
}

#[test]
fn infer_rejects_incompatible_input() {
    let tmp = tempfile::tempdir().unwrap();
    let (ck, _, _) = inference_fixture(tmp.path(), 64);
    let other = write_config(tmp.path(), "w.toml", "[video]\nwidth = 48\nnum_frames = 64\n");
    let gen = tmp.path().join("wide");
    assert!(vsynth_cmd(&["generate", "--config", &other, "--count", "1", "--out", p(&gen)]).status.success());
    let out = tmp.path().join("inf");
    let run = vsynth_cmd(&["infer", "--checkpoint", &ck, "--input", p(&gen.join("sample_00000.vsv")), "--out", p(&out)]);
    assert_eq!(run.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn heart_preset_uses_250_frame_windows() {
    let tmp = tempfile::tempdir().unwrap();
    let (ck, video, sidecar) = inference_fixture(tmp.path(), 750);
    let out = tmp.path().join("ev");
    let run = vsynth_cmd(&[
        "evaluate", "--checkpoint", &ck, "--input", &video, "--sidecar", &sidecar, "--preset", "heart", "--out", p(&out),
    ]);
    assert!(run.status.success(), "{}", stderr(&run));
    let metrics: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    let starts: Vec<u64> = metrics["per_window"].as_array().unwrap().iter().map(|w| w["start"].as_u64().unwrap()).collect();
    let skipped = metrics["extras"]["skipped_windows"].as_f64().unwrap() as usize;
    assert_eq!(starts.len() + skipped, 3);
    assert!(starts.iter().all(|s| s % 250 == 0));
    assert!(metrics["extras"]["mask_mean_iou"].is_number());
    assert!(stdout(&run).contains("MAE"));
    let csv = fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + starts.len());
}

#[test]
fn evaluate_without_annotation_reports_rate_only() {
    let tmp = tempfile::tempdir().unwrap();
    let (ck, video, _) = inference_fixture(tmp.path(), 64);
    let out = tmp.path().join("ev");
    let run = vsynth_cmd(&["evaluate", "--checkpoint", &ck, "--input", &video, "--plot", "--out", p(&out)]);
    assert!(run.status.success(), "{}", stderr(&run));
    assert!(out.join("rate.json").is_file());
    assert!(out.join("plot.csv").is_file());
    assert!(!out.join("metrics.json").exists());
}

#[test]
fn usage_errors_exit_2_and_help_exits_0() {
    assert_eq!(vsynth_cmd(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(vsynth_cmd(&["generate", "--out", "x"]).status.code(), Some(2));
    assert_eq!(vsynth_cmd(&["--help"]).status.code(), Some(0));
    assert_eq!(vsynth_cmd(&["analyze", "--input", "a.vsv", "--out", "o"]).status.code(), Some(2));
}

#[test]
fn divergence_keeps_the_last_good_checkpoint() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}\n[model.optimizer]\nkind = \"sgd\"\nlearning_rate = 1e30\n").replace("steps = 4", "steps = 30");
    let cfg = write_config(tmp.path(), "c.toml", &text);
    let ck = tmp.path().join("m.vsnp");
    let run = train(tmp.path(), &cfg, p(&ck), &[]);
    assert_eq!(run.status.code(), Some(1), "{}", stderr(&run));
    let (_, state) = TrainState::from_checkpoint(&Checkpoint::read(&ck).unwrap()).unwrap();
    assert!(state.step() < 30);
    assert!(state.params.tensors.iter().flat_map(|t| &t.data).all(|v| v.is_finite()));
    let rows = fs::read_to_string(tmp.path().join("m.vsnp.loss.csv")).unwrap().lines().count() - 1;
    assert_eq!(rows as u64, state.step());
}
