use std::path::PathBuf;

use rayon::prelude::*;
use vsynth::io::{encode_vsv, Sidecar};
use vsynth::{generate_video, VideoConfig};

use crate::common::{create_dir, load_config, sha256_hex, CliResult, Outputs};

#[derive(clap::Args)]
pub struct Args {
    /// Run config (TOML); defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    out: PathBuf,
}

struct Rendered {
    stem: String,
    vsv: Vec<u8>,
    sidecar: String,
    gt_rate: f64,
}

pub fn run(args: Args) -> CliResult<String> {
    let cfg = load_config(args.config.as_deref())?;
    create_dir(&args.out)?;
    let base = cfg.video.seed;
    let rendered: Vec<Rendered> = (0..args.count as u64)
        .into_par_iter()
        .map(|i| -> vsynth::Result<Rendered> {
            let video_cfg = VideoConfig {
                seed: base.wrapping_add(i),
                ..cfg.video.clone()
            };
            let sample = generate_video(&video_cfg)?;
            Ok(Rendered {
                stem: format!("sample_{i:05}"),
                vsv: encode_vsv(&sample.frames),
                sidecar: Sidecar::from_sample(&sample).to_json(),
                gt_rate: sample.gt_rate,
            })
        })
        .collect::<vsynth::Result<_>>()?;

    let mut out = Outputs::new("generate");
    let mut manifest = String::new();
    for r in &rendered {
        let name = format!("{}.vsv", r.stem);
        out.write(args.out.join(&name), &r.vsv)?;
        out.write(args.out.join(format!("{}.json", r.stem)), r.sidecar.as_bytes())?;
        manifest.push_str(&format!("{name}\t{}\t{}\n", sha256_hex(&r.vsv), r.gt_rate));
    }
    out.write(args.out.join("manifest.tsv"), manifest.as_bytes())?;
    eprintln!("generated {} videos in {}", rendered.len(), args.out.display());
    Ok(out.manifest_line())
}
