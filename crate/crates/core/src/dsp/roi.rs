use crate::error::{Error, Result};
use crate::signal::TimeSeries;
use crate::video::{Mask, Rect, Video};

/// Mean intensity inside each frame's box (clipped to the frame).
///
/// Frames whose box misses the frame entirely are all reported together in
/// [`Error::EmptyRoi`].
pub fn mean_roi_signal(video: &Video, boxes: &[Rect]) -> Result<TimeSeries> {
    if boxes.len() != video.num_frames {
        return Err(Error::Shape(format!(
            "{} boxes for {} frames",
            boxes.len(),
            video.num_frames
        )));
    }
    let mut values = Vec::with_capacity(boxes.len());
    let mut empty = Vec::new();
    for (t, b) in boxes.iter().enumerate() {
        match b.clip(video.width, video.height) {
            Some(r) => {
                let frame = video.frame(t);
                let mut sum = 0.0f64;
                for y in r.y0 as usize..r.y1 as usize {
                    let row = &frame[y * video.width..(y + 1) * video.width];
                    sum += row[r.x0 as usize..r.x1 as usize].iter().map(|&v| v as f64).sum::<f64>();
                }
                values.push(sum / r.area() as f64);
            }
            None => {
                empty.push(t);
                values.push(0.0);
            }
        }
    }
    if !empty.is_empty() {
        return Err(Error::EmptyRoi { frames: empty });
    }
    TimeSeries::new(values, video.fs)
}

/// Bounding boxes of per-frame reference masks. A frame whose mask is empty
/// (the object shrank below the pixel grid) reuses the previous frame's box,
/// or the first non-empty one at the start of the video.
pub fn boxes_from_masks(masks: &[Mask]) -> Result<Vec<Rect>> {
    let raw: Vec<Option<Rect>> = masks.iter().map(Mask::bounding_box).collect();
    let first = raw
        .iter()
        .flatten()
        .next()
        .copied()
        .ok_or_else(|| Error::EmptyRoi {
            frames: (0..masks.len()).collect(),
        })?;
    let mut last = first;
    Ok(raw
        .into_iter()
        .map(|b| {
            if let Some(b) = b {
                last = b;
            }
            last
        })
        .collect())
}
