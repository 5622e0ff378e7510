use std::path::PathBuf;

use anyhow::anyhow;
use vsynth::dsp::{baseline_rate, boxes_from_masks, RateMethod};
use vsynth::io::{boxes_from_csv, plot_csv, read_text, series_to_csv, Sidecar};
use vsynth::FrequencyRange;

use crate::common::{create_dir, load_config, load_video, parse_band, require_file, usage, CliResult, Outputs};

#[derive(clap::Args)]
pub struct Args {
    /// `.vsv` file or directory of PNG frames.
    #[arg(long)]
    input: PathBuf,
    /// CSV with one `x0,y0,x1,y1` box per frame.
    #[arg(long, conflicts_with = "sidecar", required_unless_present = "sidecar")]
    boxes: Option<PathBuf>,
    /// Use the bounding boxes of a generator sidecar's masks as ROI.
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Pass band in Hz, `lo:hi`.
    #[arg(long, value_parser = parse_band)]
    band: Option<(f64, f64)>,
    #[arg(long)]
    method: Option<RateMethod>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sampling rate for frame directories.
    #[arg(long, default_value_t = 27.0)]
    fs: f64,
    #[arg(long)]
    out: PathBuf,
    /// Also write every intermediate series.
    #[arg(long)]
    dump_stages: bool,
}

pub fn run(args: Args) -> CliResult<String> {
    let mut cfg = load_config(args.config.as_deref())?.baseline;
    if let Some((lo, hi)) = args.band {
        cfg.band = FrequencyRange::new(lo, hi).map_err(usage)?;
    }
    if let Some(m) = args.method {
        cfg.method = m;
    }
    cfg.validate().map_err(usage)?;
    let video = load_video(&args.input, args.fs)?;
    let boxes = match (&args.boxes, &args.sidecar) {
        (Some(p), _) => {
            require_file(p, "boxes file")?;
            boxes_from_csv(&read_text(p)?).map_err(|e| usage(anyhow!("{}: {e}", p.display())))?
        }
        (None, Some(p)) => {
            require_file(p, "sidecar")?;
            boxes_from_masks(&Sidecar::read(p)?.masks()?)?
        }
        (None, None) => unreachable!("clap requires one of --boxes / --sidecar"),
    };

    let result = baseline_rate(&video, &boxes, &cfg)?;
    create_dir(&args.out)?;
    let mut out = Outputs::new("analyze");
    out.write(args.out.join("signal.csv"), series_to_csv(&result.filtered).as_bytes())?;
    if args.dump_stages {
        for (name, s) in [
            ("raw", &result.raw),
            ("detrended", &result.detrended),
            ("normalized", &result.normalized),
            ("filtered", &result.filtered),
        ] {
            out.write(args.out.join(format!("stage_{name}.csv")), series_to_csv(s).as_bytes())?;
        }
        if cfg.method == RateMethod::Peaks {
            out.write(args.out.join("plot.csv"), plot_csv(&result.filtered, &result.peaks).as_bytes())?;
        }
    }
    let summary = serde_json::json!({
        "rate_bpm": result.rate_bpm,
        "method": match cfg.method { RateMethod::Dft => "dft", RateMethod::Peaks => "peaks" },
        "band_hz": [cfg.band.min_hz, cfg.band.max_hz],
        "peaks": result.peaks,
    });
    out.write(args.out.join("rate.json"), format!("{summary:#}\n").as_bytes())?;
    println!("rate_bpm {:.4}", result.rate_bpm);
    Ok(out.manifest_line())
}
