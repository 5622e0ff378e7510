use std::sync::mpsc::sync_channel;

use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::network::{loss_and_grads, LossBreakdown, RunMode};
use super::optim::Optimizer;
use super::params::ModelParams;
use crate::error::{Error, Result};
use crate::io::Checkpoint;
use crate::rng::seeded;
use crate::scene::{generate_video, VideoConfig, VideoSample};

const STREAM_DROPOUT: u64 = 1 << 32;

/// Network inputs and targets for one or more samples, concatenated.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub size: usize,
    pub frames: Vec<f64>,
    pub signal: Vec<f64>,
    pub masks: Vec<f64>,
}

impl Batch {
    pub fn from_samples(samples: &[VideoSample]) -> Self {
        let mut b = Batch {
            size: samples.len(),
            frames: Vec::new(),
            signal: Vec::new(),
            masks: Vec::new(),
        };
        for s in samples {
            b.frames.extend(s.frames.data.iter().map(|&v| v as f64));
            b.signal.extend_from_slice(&s.gt_signal.values);
            for m in &s.gt_masks {
                b.masks.extend(m.bits.iter().map(|&v| if v { 1.0 } else { 0.0 }));
            }
        }
        b
    }
}

/// SplitMix64 finalizer; decorrelates consecutive sample indices.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Where training samples come from.
#[derive(Debug, Clone)]
pub enum DataSource {
    /// Sample `k` is `template` rendered with seed `mix_seed(seed, k)`.
    Stream { template: VideoConfig, seed: u64 },
    /// The same samples at every step.
    Fixed(Vec<VideoSample>),
}

impl DataSource {
    pub fn batch(&self, step: u64, size: usize) -> Result<Batch> {
        match self {
            DataSource::Stream { template, seed } => {
                let samples = (0..size as u64)
                    .map(|j| {
                        let cfg = VideoConfig {
                            seed: mix_seed(*seed, step * size as u64 + j),
                            ..template.clone()
                        };
                        generate_video(&cfg)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Batch::from_samples(&samples))
            }
            DataSource::Fixed(samples) => Ok(Batch::from_samples(samples)),
        }
    }

    fn check(&self, cfg: &ModelConfig) -> Result<()> {
        let dims = |w: usize, h: usize, t: usize| {
            if (w, h, t) != (cfg.width, cfg.height, cfg.frames) {
                Err(Error::Parameter(format!(
                    "training videos are {w}x{h}x{t}, model expects {}x{}x{}",
                    cfg.width, cfg.height, cfg.frames
                )))
            } else {
                Ok(())
            }
        };
        match self {
            DataSource::Stream { template, .. } => dims(template.width, template.height, template.num_frames),
            DataSource::Fixed(samples) if samples.is_empty() => Err(Error::Parameter("no training samples".into())),
            DataSource::Fixed(samples) => samples.iter().try_for_each(|s| dims(s.frames.width, s.frames.height, s.frames.num_frames)),
        }
    }

    fn batch_size(&self, cfg: &ModelConfig) -> usize {
        match self {
            DataSource::Stream { .. } => cfg.batch_size,
            DataSource::Fixed(samples) => samples.len(),
        }
    }
}

/// Header stored as the text block of a training checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointMeta {
    pub step: u64,
    pub model: ModelConfig,
}

/// Parameters plus optimizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub params: ModelParams,
    pub optimizer: Optimizer,
}

impl TrainState {
    pub fn new(cfg: &ModelConfig) -> Result<Self> {
        let params = ModelParams::init(cfg)?;
        let optimizer = Optimizer::new(&cfg.optimizer, &params);
        Ok(Self { params, optimizer })
    }

    pub fn step(&self) -> u64 {
        self.optimizer.step
    }

    pub fn to_checkpoint(&self, cfg: &ModelConfig) -> Result<Checkpoint> {
        let meta = CheckpointMeta {
            step: self.step(),
            model: cfg.clone(),
        };
        let text = toml::to_string(&meta).map_err(|e| Error::Format(format!("checkpoint header: {e}")))?;
        let mut ckpt = self.params.to_checkpoint(&text);
        ckpt.tensors.extend(self.optimizer.state_tensors(&self.params));
        Ok(ckpt)
    }

    /// Rebuilds the model config and full training state from a checkpoint.
    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<(ModelConfig, Self)> {
        let meta = read_meta(ckpt)?;
        let mut state = Self::new(&meta.model)?;
        state.params.load_checkpoint(ckpt)?;
        state.optimizer.load_state(&state.params, ckpt, meta.step)?;
        Ok((meta.model, state))
    }
}

pub fn read_meta(ckpt: &Checkpoint) -> Result<CheckpointMeta> {
    toml::from_str(&ckpt.config).map_err(|e| Error::Format(format!("checkpoint header: {e}")))
}

/// Loss of one update step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    #[serde(flatten)]
    pub loss: LossBreakdown,
}

/// Runs `steps` updates starting from `state`, calling `on_step` after each.
/// Batches are generated on a producer thread one step ahead. The result is
/// a pure function of the config, data source and starting state.
pub fn train(
    cfg: &ModelConfig,
    source: &DataSource,
    state: &mut TrainState,
    steps: u64,
    mut on_step: impl FnMut(&StepRecord),
) -> Result<Vec<StepRecord>> {
    cfg.validate()?;
    source.check(cfg)?;
    let size = source.batch_size(cfg);
    let start = state.step();
    let mut trace = Vec::with_capacity(steps as usize);
    std::thread::scope(|scope| -> Result<()> {
        let (tx, rx) = sync_channel::<Result<Batch>>(2);
        scope.spawn(move || {
            for step in start..start + steps {
                if tx.send(source.batch(step, size)).is_err() {
                    break;
                }
            }
        });
        for step in start..start + steps {
            let batch = rx.recv().map_err(|_| Error::Internal("data producer stopped".into()))??;
            let mut rng = seeded(cfg.init_seed, STREAM_DROPOUT + step);
            let (loss, grads, stats) = loss_and_grads(
                &state.params,
                cfg,
                &batch.frames,
                &batch.signal,
                &batch.masks,
                batch.size,
                RunMode::train(&mut rng),
            )
            .map_err(|e| match e {
                Error::Numeric(what) => Error::Numeric(format!("{what} at step {step}")),
                other => other,
            })?;
            // commit only a finite update so a diverging run keeps its last
            // good state
            let mut next = state.clone();
            next.optimizer.update(&mut next.params, &grads);
            for (i, values) in stats {
                next.params.tensors[i].data = values.into_iter().map(|v| v as f32 as f64).collect();
            }
            if let Some(t) = next.params.tensors.iter().find(|t| t.data.iter().any(|v| !v.is_finite())) {
                return Err(Error::Numeric(format!("non-finite {} after update at step {step}", t.name)));
            }
            *state = next;
            let rec = StepRecord { step, loss };
            on_step(&rec);
            trace.push(rec);
        }
        Ok(())
    })?;
    Ok(trace)
}
