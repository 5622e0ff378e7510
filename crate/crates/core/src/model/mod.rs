//! Desk-scale two-pathway sequence model with hand-written gradients.

mod config;
mod gradcheck;
mod infer;
mod kernels;
mod layers;
mod network;
mod optim;
mod params;
mod train;

pub use config::{LossWeights, ModelConfig, OptimizerConfig, OptimizerKind, UpsampleMode};
pub use gradcheck::{gradient_check, relative_error, GradCheckBatch, GradProbe};
pub use infer::{clip_starts, infer_rate, predict, threshold_maps, ModelOutput, RateInference, INFER_MIN_PEAK_DISTANCE};
pub use kernels::{gemm, ConvGeom};
pub use network::{
    backward, forward, loss, loss_and_grads, probabilities, ForwardCache, LossBreakdown, Outputs, RunMode, StatUpdates,
};
pub use optim::Optimizer;
pub use params::{Grads, ModelParams, Tensor};
pub use train::{mix_seed, read_meta, train, Batch, CheckpointMeta, DataSource, StepRecord, TrainState};
