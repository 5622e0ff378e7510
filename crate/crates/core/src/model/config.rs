use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            kind: OptimizerKind::Sgd,
            learning_rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// How per-step head outputs are stretched back to one value per frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpsampleMode {
    Nearest,
    Linear,
}

/// Weights of the four loss terms. `roi_pos_weight` scales the positive
/// (inside-mask) part of both ROI cross-entropies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossWeights {
    pub sig_local: f64,
    pub sig_global: f64,
    pub roi_local: f64,
    pub roi_global: f64,
    pub roi_pos_weight: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            sig_local: 1.0,
            sig_global: 1.0,
            roi_local: 1.0,
            roi_global: 1.0,
            roi_pos_weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    /// Odd cubic kernel size shared by every (transposed) convolution.
    pub kernel: usize,
    pub channels: usize,
    /// One entry per encoder block.
    pub temporal_strides: Vec<usize>,
    pub spatial_strides: Vec<usize>,
    pub lstm_layers: usize,
    pub lstm_hidden: usize,
    pub bidirectional: bool,
    /// Hidden widths of both signal heads; a final width-1 layer is implied.
    pub head_widths: Vec<usize>,
    /// Feed each decoder level the matching encoder activation as well.
    pub skip_connections: bool,
    /// Subtract each pixel's temporal mean from the input clip.
    pub center_input: bool,
    pub upsample: UpsampleMode,
    pub dropout: f64,
    pub loss: LossWeights,
    pub optimizer: OptimizerConfig,
    pub batch_size: usize,
    pub init_seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            frames: 256,
            height: 64,
            width: 64,
            kernel: 3,
            channels: 16,
            temporal_strides: vec![2, 2, 2, 2],
            spatial_strides: vec![2, 2, 2, 2],
            lstm_layers: 2,
            lstm_hidden: 64,
            bidirectional: true,
            head_widths: vec![32, 8],
            skip_connections: false,
            center_input: false,
            upsample: UpsampleMode::Nearest,
            dropout: 0.1,
            loss: LossWeights::default(),
            optimizer: OptimizerConfig::default(),
            batch_size: 4,
            init_seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn blocks(&self) -> usize {
        self.temporal_strides.len()
    }

    /// `(T', h, w)` of the deepest encoder activation.
    pub fn embedding_dims(&self) -> [usize; 3] {
        let t: usize = self.temporal_strides.iter().product();
        let s: usize = self.spatial_strides.iter().product();
        [self.frames / t, self.height / s, self.width / s]
    }

    /// Per-timestep embedding width.
    pub fn embedding_width(&self) -> usize {
        let [_, h, w] = self.embedding_dims();
        self.channels * h * w
    }

    pub fn lstm_output_width(&self) -> usize {
        self.lstm_hidden * if self.bidirectional { 2 } else { 1 }
    }

    /// Input `(T, H, W)` of encoder block `i`; `i == blocks()` gives the
    /// embedding dims.
    pub fn level_dims(&self, i: usize) -> [usize; 3] {
        let mut d = [self.frames, self.height, self.width];
        for j in 0..i {
            d[0] /= self.temporal_strides[j];
            d[1] /= self.spatial_strides[j];
            d[2] /= self.spatial_strides[j];
        }
        d
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Parameter(m));
        if self.blocks() == 0 || self.spatial_strides.len() != self.blocks() {
            return fail("temporal and spatial strides need one entry per block (at least one)".into());
        }
        if self.temporal_strides.iter().chain(&self.spatial_strides).any(|&s| s == 0) {
            return fail("strides must be positive".into());
        }
        if self.kernel % 2 == 0 {
            return fail(format!("kernel {} must be odd", self.kernel));
        }
        let t: usize = self.temporal_strides.iter().product();
        let s: usize = self.spatial_strides.iter().product();
        if self.frames == 0 || self.frames % t != 0 || self.height % s != 0 || self.width % s != 0 || self.height == 0 || self.width == 0 {
            return fail(format!(
                "input {}x{}x{} is not divisible by the cumulative strides ({t}, {s}, {s})",
                self.frames, self.height, self.width
            ));
        }
        if self.channels == 0 || self.lstm_layers == 0 || self.lstm_hidden == 0 || self.batch_size == 0 {
            return fail("widths, layer counts and batch size must be at least 1".into());
        }
        if self.head_widths.contains(&0) {
            return fail("head widths must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout {} must lie in [0, 1)", self.dropout));
        }
        let w = &self.loss;
        let weights = [w.sig_local, w.sig_global, w.roi_local, w.roi_global];
        if weights.iter().any(|&v| !(v >= 0.0 && v.is_finite())) || weights.iter().all(|&v| v == 0.0) {
            return fail("loss weights must be non-negative and not all zero".into());
        }
        if !(w.roi_pos_weight > 0.0) {
            return fail("roi_pos_weight must be positive".into());
        }
        let o = &self.optimizer;
        if !(o.learning_rate > 0.0 && (0.0..1.0).contains(&o.beta1) && (0.0..1.0).contains(&o.beta2) && o.epsilon > 0.0) {
            return fail("optimizer settings out of range".into());
        }
        Ok(())
    }
}
