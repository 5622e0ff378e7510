use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::video::{Mask, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoiScore {
    pub iou: f64,
    pub center_hit: bool,
    /// Distance from the mask's center of mass to the box center, pixels.
    pub dc: f64,
}

/// Scores a predicted mask against a reference box treated as a filled mask.
pub fn roi_metrics(pred: &Mask, reference: &Rect) -> Result<RoiScore> {
    let (cx, cy) = pred.center_of_mass().ok_or(Error::EmptyPrediction)?;
    let boxed = Mask::from_rect(reference, pred.width, pred.height);
    let (bx, by) = reference.center();
    Ok(RoiScore {
        iou: pred.iou(&boxed),
        center_hit: reference.contains_point(cx, cy),
        dc: ((cx - bx).powi(2) + (cy - by).powi(2)).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiSummary {
    /// Mean IOU over all frames, empty predictions scoring 0.
    pub mean_iou: f64,
    /// Fraction of frames whose prediction center falls in the box.
    pub chr: f64,
    /// Mean center distance over frames with a prediction.
    pub mean_dc: Option<f64>,
    /// Frames with an empty prediction.
    pub misses: usize,
    pub frames: usize,
}

/// Per-sequence aggregate of [`roi_metrics`].
pub fn aggregate_roi(preds: &[Mask], boxes: &[Rect]) -> Result<RoiSummary> {
    if preds.len() != boxes.len() || preds.is_empty() {
        return Err(Error::Shape(format!("{} masks for {} boxes", preds.len(), boxes.len())));
    }
    let (mut iou, mut hits, mut dc, mut misses) = (0.0, 0usize, 0.0, 0usize);
    for (m, b) in preds.iter().zip(boxes) {
        match roi_metrics(m, b) {
            Ok(s) => {
                iou += s.iou;
                hits += s.center_hit as usize;
                dc += s.dc;
            }
            Err(Error::EmptyPrediction) => misses += 1,
            Err(e) => return Err(e),
        }
    }
    let n = preds.len();
    Ok(RoiSummary {
        mean_iou: iou / n as f64,
        chr: hits as f64 / n as f64,
        mean_dc: (misses < n).then(|| dc / (n - misses) as f64),
        misses,
        frames: n,
    })
}
