use rand::Rng;

use crate::error::{Error, Result};
use crate::filter::gaussian_blur;
use crate::video::Mask;

/// Forms one frame from disjoint masks with their intensities over a
/// background: each pixel takes the value of its covering mask, or the
/// background where no mask covers it. The result is Gaussian-blurred with
/// `blur_sigma`, then each pixel is independently replaced by 0 or 1 with
/// probability `sp_density`.
pub fn compose_frame<R: Rng + ?Sized>(
    layers: &[(&Mask, f64)],
    background: &[f64],
    width: usize,
    height: usize,
    blur_sigma: f64,
    sp_density: f64,
    rng: &mut R,
) -> Result<Vec<f32>> {
    if background.len() != width * height {
        return Err(Error::Shape(format!(
            "background has {} pixels, frame has {}",
            background.len(),
            width * height
        )));
    }
    let mut image = background.to_vec();
    let mut covered = vec![false; width * height];
    for (mask, value) in layers {
        for (i, _) in mask.bits.iter().enumerate().filter(|(_, &b)| b) {
            if covered[i] {
                return Err(Error::Internal(format!("masks overlap at pixel {i}")));
            }
            covered[i] = true;
            image[i] = *value;
        }
    }
    let image = gaussian_blur(&image, width, height, blur_sigma);
    let mut out: Vec<f32> = image.into_iter().map(|v| v.clamp(0.0, 1.0) as f32).collect();
    if sp_density > 0.0 {
        for px in out.iter_mut() {
            if rng.gen_bool(sp_density) {
                *px = if rng.gen_bool(0.5) { 1.0 } else { 0.0 };
            }
        }
    }
    Ok(out)
}
