use std::path::PathBuf;

use anyhow::anyhow;
use vsynth::io::Checkpoint;
use vsynth::model::{train, DataSource, StepRecord, TrainState};

use crate::common::{create_dir, load_config, require_file, usage, CliError, CliResult, Outputs};

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Checkpoint to write (rewritten every `train.checkpoint_every` steps).
    #[arg(long)]
    out: PathBuf,
    /// Continue from this checkpoint; its model section must match the config.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Overrides `train.steps`.
    #[arg(long)]
    steps: Option<u64>,
    /// Per-step loss CSV; defaults to `<out>.loss.csv`.
    #[arg(long)]
    loss_csv: Option<PathBuf>,
}

const LOSS_HEADER: &str = "step,total,sig_local,sig_global,roi_local,roi_global\n";

fn loss_row(r: &StepRecord) -> String {
    let l = &r.loss;
    format!(
        "{},{},{},{},{},{}\n",
        r.step, l.total, l.sig_local, l.sig_global, l.roi_local, l.roi_global
    )
}

pub fn run(args: Args) -> CliResult<String> {
    let cfg = load_config(args.config.as_deref())?;
    let model = &cfg.model;
    let v = &cfg.video;
    if (v.width, v.height, v.num_frames) != (model.width, model.height, model.frames) {
        return Err(usage(anyhow!(
            "video section renders {}x{}x{} clips but the model expects {}x{}x{}",
            v.width,
            v.height,
            v.num_frames,
            model.width,
            model.height,
            model.frames
        )));
    }
    let mut state = match &args.resume {
        Some(path) => {
            require_file(path, "checkpoint")?;
            let (ck_model, state) = TrainState::from_checkpoint(&Checkpoint::read(path)?).map_err(usage)?;
            if &ck_model != model {
                return Err(usage(anyhow!(
                    "checkpoint {} was trained with a different model section",
                    path.display()
                )));
            }
            state
        }
        None => TrainState::new(model).map_err(usage)?,
    };
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    let steps = args.steps.unwrap_or(cfg.train.steps);
    let source = DataSource::Stream {
        template: cfg.video.clone(),
        seed: cfg.video.seed,
    };
    let loss_path = args
        .loss_csv
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.loss.csv", args.out.display())));

    let mut out = Outputs::new("train");
    let mut csv = String::from(LOSS_HEADER);
    let chunk = if cfg.train.checkpoint_every == 0 {
        steps.max(1)
    } else {
        cfg.train.checkpoint_every
    };
    let mut done = 0;
    let mut failure = None;
    while done < steps {
        let n = chunk.min(steps - done);
        let result = train(model, &source, &mut state, n, |r| {
            csv.push_str(&loss_row(r));
            if r.step % 50 == 0 {
                eprintln!("step {} loss {:.5}", r.step, r.loss.total);
            }
        });
        if let Err(e) = result {
            failure = Some(e);
            break;
        }
        done += n;
        if done < steps {
            out.write(args.out.clone(), &state.to_checkpoint(model)?.encode())?;
        }
    }
    // the state is only advanced by successful steps, so it is the last
    // good one even after a failure
    out.write(args.out.clone(), &state.to_checkpoint(model)?.encode())?;
    out.write(loss_path, csv.as_bytes())?;
    if let Some(e) = failure {
        return Err(CliError::Runtime(anyhow!("training aborted after step {}: {e}", state.step())));
    }
    eprintln!("trained to step {}", state.step());
    Ok(out.manifest_line())
}
