//! Frame stacks, binary masks and pixel rectangles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grayscale video, frame-major then row-major, intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Video {
    pub width: usize,
    pub height: usize,
    pub num_frames: usize,
    pub fs: f64,
    pub data: Vec<f32>,
}

impl Video {
    pub fn new(width: usize, height: usize, num_frames: usize, fs: f64, data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height * num_frames {
            return Err(Error::Shape(format!(
                "{} samples for {num_frames} frames of {width}x{height}",
                data.len()
            )));
        }
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::param(format!("sampling rate {fs} must be positive")));
        }
        Ok(Self {
            width,
            height,
            num_frames,
            fs,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize, num_frames: usize, fs: f64) -> Self {
        Self {
            width,
            height,
            num_frames,
            fs,
            data: vec![0.0; width * height * num_frames],
        }
    }

    pub fn frame_len(&self) -> usize {
        self.width * self.height
    }

    pub fn frame(&self, t: usize) -> &[f32] {
        let n = self.frame_len();
        &self.data[t * n..(t + 1) * n]
    }

    pub fn frame_mut(&mut self, t: usize) -> &mut [f32] {
        let n = self.frame_len();
        &mut self.data[t * n..(t + 1) * n]
    }

    pub fn at(&self, t: usize, y: usize, x: usize) -> f32 {
        self.data[(t * self.height + y) * self.width + x]
    }

    /// Frames `[start, end)` as a new video.
    pub fn clip(&self, start: usize, end: usize) -> Video {
        let n = self.frame_len();
        Video {
            width: self.width,
            height: self.height,
            num_frames: end - start,
            fs: self.fs,
            data: self.data[start * n..end * n].to_vec(),
        }
    }
}

/// Axis-aligned pixel rectangle `[x0, x1) x [y0, y1)`. Coordinates may lie
/// outside the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl Rect {
    pub fn new(x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn area(&self) -> i64 {
        (self.x1 - self.x0).max(0) * (self.y1 - self.y0).max(0)
    }

    /// Intersection with a `width x height` frame, `None` when empty.
    pub fn clip(&self, width: usize, height: usize) -> Option<Rect> {
        let r = Rect {
            x0: self.x0.max(0),
            y0: self.y0.max(0),
            x1: self.x1.min(width as i64),
            y1: self.y1.min(height as i64),
        };
        (r.x1 > r.x0 && r.y1 > r.y0).then_some(r)
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x0 + self.x1) as f64 / 2.0, (self.y0 + self.y1) as f64 / 2.0)
    }

    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        x >= self.x0 as f64 && x < self.x1 as f64 && y >= self.y0 as f64 && y < self.y1 as f64
    }
}

/// Binary `width x height` mask, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl Mask {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    /// Filled rectangle clipped to the frame.
    pub fn from_rect(rect: &Rect, width: usize, height: usize) -> Self {
        let mut m = Mask::empty(width, height);
        if let Some(r) = rect.clip(width, height) {
            for y in r.y0..r.y1 {
                for x in r.x0..r.x1 {
                    m.bits[y as usize * width + x as usize] = true;
                }
            }
        }
        m
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn union_with(&mut self, other: &Mask) {
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    pub fn intersection_count(&self, other: &Mask) -> usize {
        self.bits.iter().zip(&other.bits).filter(|(&a, &b)| a && b).count()
    }

    pub fn union_count(&self, other: &Mask) -> usize {
        self.bits.iter().zip(&other.bits).filter(|(&a, &b)| a || b).count()
    }

    /// Intersection over union; two empty masks score 0.
    pub fn iou(&self, other: &Mask) -> f64 {
        let union = self.union_count(other);
        if union == 0 {
            0.0
        } else {
            self.intersection_count(other) as f64 / union as f64
        }
    }

    /// Tight bounding rectangle of the set pixels.
    pub fn bounding_box(&self) -> Option<Rect> {
        let mut r: Option<Rect> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    let (x, y) = (x as i64, y as i64);
                    r = Some(match r {
                        None => Rect::new(x, y, x + 1, y + 1),
                        Some(b) => Rect::new(b.x0.min(x), b.y0.min(y), b.x1.max(x + 1), b.y1.max(y + 1)),
                    });
                }
            }
        }
        r
    }

    /// Mean of set pixel centers `(x + 0.5, y + 0.5)`.
    pub fn center_of_mass(&self) -> Option<(f64, f64)> {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    sx += x as f64 + 0.5;
                    sy += y as f64 + 0.5;
                    n += 1;
                }
            }
        }
        (n > 0).then(|| (sx / n as f64, sy / n as f64))
    }

    /// Run lengths over the row-major bits, alternating and starting with a
    /// (possibly empty) run of zeros.
    pub fn to_rle(&self) -> Vec<u32> {
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0u32;
        for &b in &self.bits {
            if b == current {
                len += 1;
            } else {
                runs.push(len);
                current = b;
                len = 1;
            }
        }
        runs.push(len);
        runs
    }

    pub fn from_rle(runs: &[u32], width: usize, height: usize) -> Result<Self> {
        let total: u64 = runs.iter().map(|&r| r as u64).sum();
        if total != (width * height) as u64 {
            return Err(Error::Format(format!(
                "mask runs cover {total} pixels, expected {}",
                width * height
            )));
        }
        let mut bits = Vec::with_capacity(width * height);
        for (i, &r) in runs.iter().enumerate() {
            bits.extend(std::iter::repeat(i % 2 == 1).take(r as usize));
        }
        Ok(Self { width, height, bits })
    }
}
