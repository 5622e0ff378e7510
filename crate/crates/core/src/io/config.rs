use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dsp::BaselineConfig;
use crate::error::{Error, Result};
use crate::eval::WindowOptions;
use crate::model::ModelConfig;
use crate::scene::VideoConfig;

/// Environment variable that replaces `video.seed` after loading.
pub const SEED_ENV: &str = "VSYNTH_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EvalPreset {
    /// 1000-frame windows.
    #[default]
    Respiration,
    /// 250-frame windows.
    Heart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub preset: EvalPreset,
    /// Overrides the preset's counting window, frames.
    pub window: Option<usize>,
    pub stride: Option<usize>,
    pub min_peak_distance: Option<usize>,
}

impl EvalConfig {
    pub fn window_options(&self, fs: f64) -> WindowOptions {
        let mut w = match self.preset {
            EvalPreset::Respiration => WindowOptions::respiration(fs),
            EvalPreset::Heart => WindowOptions::heart(fs),
        };
        if let Some(v) = self.window {
            w.window = v;
        }
        w.stride = self.stride.or(w.stride);
        if let Some(d) = self.min_peak_distance {
            w.min_peak_distance = d;
        }
        w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub steps: u64,
    /// Write an intermediate checkpoint every this many steps (0 = only at
    /// the end).
    pub checkpoint_every: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            steps: 1000,
            checkpoint_every: 0,
        }
    }
}

/// Everything a CLI run needs. Unknown keys anywhere are rejected.
/// `video.seed` seeds both corpus generation and the training stream;
/// `model.init_seed` seeds weights and dropout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub video: VideoConfig,
    pub model: ModelConfig,
    pub baseline: BaselineConfig,
    pub eval: EvalConfig,
    pub train: TrainConfig,
}

impl RunConfig {
    /// Parses TOML text and validates every section.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Format(format!("config: {}", e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(format!("config: {e}")))
    }

    /// Reads a config file and applies the `VSYNTH_SEED` override.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.apply_seed_override(std::env::var(SEED_ENV).ok().as_deref())?;
        Ok(cfg)
    }

    pub fn apply_seed_override(&mut self, value: Option<&str>) -> Result<()> {
        if let Some(v) = value {
            self.video.seed = v
                .trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.video.validate()?;
        self.model.validate()?;
        self.baseline.validate()?;
        let w = self.eval.window_options(self.video.fs);
        if w.window < 2 || w.stride() == 0 || w.min_peak_distance == 0 {
            return Err(Error::Parameter("eval window, stride and peak distance must be positive".into()));
        }
        Ok(())
    }
}
