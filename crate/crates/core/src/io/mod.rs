//! On-disk formats: the VSV frame container, parameter checkpoints, run
//! configs, ground truth sidecars, CSV series and boxes, and PNG frame
//! directories.

mod checkpoint;
mod config;
mod csv;
mod frames;
mod sidecar;
mod vsv;

pub use checkpoint::{Checkpoint, NamedTensor, CHECKPOINT_VERSION};
pub use config::{EvalConfig, EvalPreset, RunConfig, TrainConfig, SEED_ENV};
pub use csv::{boxes_from_csv, boxes_to_csv, plot_csv, read_text, series_from_csv, series_to_csv, write_text};
pub use frames::read_frame_dir;
pub use sidecar::{Sidecar, TrackDoc};
pub use vsv::{decode_vsv, encode_vsv, read_vsv, write_vsv};
