//! Synthetic vital-sign videos, classical and learned rate estimation, and
//! the evaluation harness around them.
//!
//! * [`signal`] – periodic target and distractor signals
//! * [`scene`] – moving-ellipse video synthesis with ground truth
//! * [`dsp`] – ROI averaging, detrending, band-pass, spectral and peak rates
//! * [`model`] – two-pathway convolutional/recurrent sequence model
//! * [`eval`] – windowed rate error, temporal localization, ROI scores
//! * [`io`] – container formats, configs, sidecars and manifests

pub mod dsp;
pub mod error;
pub mod eval;
pub mod filter;
pub mod io;
pub mod model;
pub mod rng;
pub mod scene;
pub mod signal;
pub mod video;

pub use error::{Error, Result};
pub use scene::{generate_video, VideoConfig, VideoSample};
pub use signal::{FrequencyRange, SignalFamily, SignalSpec, TimeSeries};
pub use video::{Mask, Rect, Video};
