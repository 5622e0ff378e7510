use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::{EllipseTrack, Role, VideoConfig, VideoSample};
use crate::signal::{SignalDoc, SignalSpec, TimeSeries};
use crate::video::Mask;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackDoc {
    pub role: Role,
    pub z_order: u32,
    pub start_pos: [f64; 2],
    pub end_pos: [f64; 2],
    pub axes: [f64; 2],
    pub angle_deg: f64,
    pub signal: SignalDoc,
}

/// Ground truth stored next to a generated video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub config: VideoConfig,
    pub gt_rate: f64,
    pub gt_signal: Vec<f64>,
    /// Per-frame interest mask as alternating zero/one run lengths.
    pub gt_masks_rle: Vec<Vec<u32>>,
    pub tracks: Vec<TrackDoc>,
}

impl Sidecar {
    pub fn from_sample(s: &VideoSample) -> Self {
        let fs = s.config.fs;
        Self {
            config: s.config.clone(),
            gt_rate: s.gt_rate,
            gt_signal: s.gt_signal.values.clone(),
            gt_masks_rle: s.gt_masks.iter().map(Mask::to_rle).collect(),
            tracks: s
                .tracks
                .iter()
                .map(|t| TrackDoc {
                    role: t.role,
                    z_order: t.z_order,
                    start_pos: t.start_pos,
                    end_pos: t.end_pos,
                    axes: t.axes,
                    angle_deg: t.angle_deg,
                    signal: t.signal.to_doc(fs),
                })
                .collect(),
        }
    }

    pub fn masks(&self) -> Result<Vec<Mask>> {
        self.gt_masks_rle
            .iter()
            .map(|r| Mask::from_rle(r, self.config.width, self.config.height))
            .collect()
    }

    pub fn signal(&self) -> Result<TimeSeries> {
        TimeSeries::new(self.gt_signal.clone(), self.config.fs)
    }

    pub fn tracks(&self) -> Result<Vec<EllipseTrack>> {
        self.tracks
            .iter()
            .map(|d| {
                Ok(EllipseTrack {
                    start_pos: d.start_pos,
                    end_pos: d.end_pos,
                    axes: d.axes,
                    angle_deg: d.angle_deg,
                    z_order: d.z_order,
                    role: d.role,
                    signal: SignalSpec::from_doc(&d.signal, self.config.fs)?,
                })
            })
            .collect()
    }

    /// Signal of the first object of interest.
    pub fn target_spec(&self) -> Result<SignalSpec> {
        let doc = self
            .tracks
            .iter()
            .find(|t| t.role == Role::Interest)
            .ok_or_else(|| Error::Format("sidecar lists no object of interest".into()))?;
        SignalSpec::from_doc(&doc.signal, self.config.fs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sidecar serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("sidecar: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}
