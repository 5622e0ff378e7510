use std::path::{Path, PathBuf};

use anyhow::anyhow;
use vsynth::dsp::detect_peaks;
use vsynth::eval::{aggregate_roi, render_table, windowed_rate_eval, RateAnnotation};
use vsynth::io::{boxes_from_csv, plot_csv, read_text, series_to_csv, Checkpoint, EvalPreset, Sidecar};
use vsynth::model::{predict, threshold_maps, ModelConfig, ModelParams, TrainState, INFER_MIN_PEAK_DISTANCE};
use vsynth::{Mask, TimeSeries, Video};

use crate::common::{create_dir, load_config, load_video, require_file, usage, CliResult, Outputs};

#[derive(clap::Args)]
pub struct InferArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// `.vsv` file or directory of PNG frames.
    #[arg(long)]
    input: PathBuf,
    /// Sampling rate for frame directories.
    #[arg(long, default_value_t = 27.0)]
    fs: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 27.0)]
    fs: f64,
    /// Generator sidecar: reference events from the target signal and
    /// reference masks for IOU.
    #[arg(long, conflicts_with = "annotation")]
    sidecar: Option<PathBuf>,
    /// Reference event frame indices, one per line.
    #[arg(long)]
    annotation: Option<PathBuf>,
    /// Reference boxes, one `x0,y0,x1,y1` row per frame.
    #[arg(long)]
    boxes: Option<PathBuf>,
    /// Supplies the `[eval]` section.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["respiration", "heart"])]
    preset: Option<String>,
    /// Counting window in frames; overrides the preset.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Write `plot.csv` with the predicted signal and its peaks.
    #[arg(long)]
    plot: bool,
}

struct Prediction {
    signal: TimeSeries,
    roi: Vec<Mask>,
    peaks: Vec<usize>,
    rate: Option<f64>,
    signal_local: TimeSeries,
}

fn load_model(path: &Path) -> CliResult<(ModelConfig, ModelParams)> {
    require_file(path, "checkpoint")?;
    let (cfg, state) = TrainState::from_checkpoint(&Checkpoint::read(path)?).map_err(usage)?;
    Ok((cfg, state.params))
}

fn run_model(checkpoint: &Path, video: &Video) -> CliResult<Prediction> {
    let (cfg, params) = load_model(checkpoint)?;
    if (video.width, video.height) != (cfg.width, cfg.height) || video.num_frames < cfg.frames {
        return Err(usage(anyhow!(
            "input is {}x{}x{}, checkpoint model needs {}x{} frames and at least {} of them",
            video.width,
            video.height,
            video.num_frames,
            cfg.width,
            cfg.height,
            cfg.frames
        )));
    }
    let out = predict(&params, &cfg, video)?;
    let signal = TimeSeries::new(out.signal_global, video.fs)?;
    let peaks = detect_peaks(&signal.values, INFER_MIN_PEAK_DISTANCE);
    let rate = vsynth::dsp::rate_from_peaks(&peaks, video.fs).ok();
    Ok(Prediction {
        roi: threshold_maps(&out.roi_global, cfg.width, cfg.height),
        signal_local: TimeSeries::new(out.signal_local, video.fs)?,
        signal,
        peaks,
        rate,
    })
}

fn write_prediction(out: &mut Outputs, dir: &Path, p: &Prediction) -> CliResult<()> {
    out.write(dir.join("signal.csv"), series_to_csv(&p.signal).as_bytes())?;
    out.write(dir.join("signal_local.csv"), series_to_csv(&p.signal_local).as_bytes())?;
    let rle: Vec<Vec<u32>> = p.roi.iter().map(Mask::to_rle).collect();
    let roi = serde_json::json!({ "width": p.roi[0].width, "height": p.roi[0].height, "masks_rle": rle });
    out.write(dir.join("roi.json"), format!("{roi}\n").as_bytes())?;
    let rate = serde_json::json!({ "rate_bpm": p.rate, "peaks": p.peaks });
    out.write(dir.join("rate.json"), format!("{rate:#}\n").as_bytes())?;
    match p.rate {
        Some(r) => println!("rate_bpm {r:.4}"),
        None => eprintln!("fewer than two peaks in the predicted signal; no rate"),
    }
    Ok(())
}

pub fn run_infer(args: InferArgs) -> CliResult<String> {
    let video = load_video(&args.input, args.fs)?;
    let pred = run_model(&args.checkpoint, &video)?;
    create_dir(&args.out)?;
    let mut out = Outputs::new("infer");
    write_prediction(&mut out, &args.out, &pred)?;
    Ok(out.manifest_line())
}

fn read_events(path: &Path) -> CliResult<Vec<usize>> {
    let text = read_text(path)?;
    let mut events = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (i == 0 && line.parse::<usize>().is_err() && !line.starts_with(char::is_numeric)) {
            continue;
        }
        let v = line
            .parse()
            .map_err(|_| usage(anyhow!("{}: line {}: {line:?} is not a frame index", path.display(), i + 1)))?;
        events.push(v);
    }
    Ok(events)
}

pub fn run_evaluate(args: EvaluateArgs) -> CliResult<String> {
    let mut cfg = load_config(args.config.as_deref())?.eval;
    if let Some(p) = &args.preset {
        cfg.preset = if p == "heart" { EvalPreset::Heart } else { EvalPreset::Respiration };
        cfg.window = None;
    }
    if let Some(w) = args.window {
        cfg.window = Some(w);
    }
    for p in [&args.sidecar, &args.annotation, &args.boxes].into_iter().flatten() {
        require_file(p, "reference file")?;
    }
    let video = load_video(&args.input, args.fs)?;
    let opts = cfg.window_options(video.fs);
    let sidecar = args.sidecar.as_deref().map(Sidecar::read).transpose()?;
    let annotation = match (&sidecar, &args.annotation) {
        (Some(s), _) => Some(RateAnnotation::from_spec(&s.target_spec()?, video.num_frames, video.fs)?),
        (None, Some(p)) => Some(RateAnnotation::new(read_events(p)?, video.fs).map_err(usage)?),
        (None, None) => None,
    };
    let boxes = match &args.boxes {
        Some(p) => Some(boxes_from_csv(&read_text(p)?).map_err(|e| usage(anyhow!("{}: {e}", p.display())))?),
        None => None,
    };
    if opts.window > video.num_frames && annotation.is_some() {
        return Err(usage(anyhow!(
            "evaluation window of {} frames is longer than the {}-frame input",
            opts.window,
            video.num_frames
        )));
    }

    let pred = run_model(&args.checkpoint, &video)?;
    create_dir(&args.out)?;
    let mut out = Outputs::new("evaluate");
    write_prediction(&mut out, &args.out, &pred)?;
    if args.plot {
        out.write(args.out.join("plot.csv"), plot_csv(&pred.signal, &pred.peaks).as_bytes())?;
    }
    if let Some(ann) = &annotation {
        let mut report = windowed_rate_eval(&pred.signal, ann, &opts, None)?;
        if let Some(b) = &boxes {
            let roi = aggregate_roi(&pred.roi, b)?;
            report.extras.insert("roi_mean_iou".into(), roi.mean_iou);
            report.extras.insert("roi_chr".into(), roi.chr);
            if let Some(dc) = roi.mean_dc {
                report.extras.insert("roi_mean_dc".into(), dc);
            }
        }
        if let Some(s) = &sidecar {
            let masks = s.masks()?;
            let iou = masks.iter().zip(&pred.roi).map(|(g, p)| g.iou(p)).sum::<f64>() / masks.len().max(1) as f64;
            report.extras.insert("mask_mean_iou".into(), iou);
        }
        out.write(args.out.join("metrics.json"), report.to_json().as_bytes())?;
        out.write(args.out.join("metrics.csv"), report.to_csv().as_bytes())?;
        print!("{}", render_table(&[("model", &report)]));
    } else if let Some(b) = &boxes {
        let roi = aggregate_roi(&pred.roi, b)?;
        let doc = serde_json::json!({ "roi_mean_iou": roi.mean_iou, "roi_chr": roi.chr, "roi_mean_dc": roi.mean_dc });
        out.write(args.out.join("metrics.json"), format!("{doc:#}\n").as_bytes())?;
    }
    Ok(out.manifest_line())
}
