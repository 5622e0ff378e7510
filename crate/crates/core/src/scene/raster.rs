use super::track::EllipseState;
use crate::video::Mask;

/// Pixel-center inclusion test for a filled rotated ellipse.
pub fn rasterize_ellipse(state: &EllipseState, width: usize, height: usize) -> Mask {
    let mut mask = Mask::empty(width, height);
    let [cx, cy] = state.pos;
    let [a, b] = state.axes;
    let (sin, cos) = state.angle_deg.to_radians().sin_cos();
    // bounding radius of the rotated ellipse
    let rx = ((a * cos).powi(2) + (b * sin).powi(2)).sqrt();
    let ry = ((a * sin).powi(2) + (b * cos).powi(2)).sqrt();
    let x_lo = ((cx - rx - 0.5).floor().max(0.0)) as usize;
    let x_hi = ((cx + rx + 0.5).ceil().min(width as f64)).max(0.0) as usize;
    let y_lo = ((cy - ry - 0.5).floor().max(0.0)) as usize;
    let y_hi = ((cy + ry + 0.5).ceil().min(height as f64)).max(0.0) as usize;
    for y in y_lo..y_hi {
        let dy = y as f64 + 0.5 - cy;
        for x in x_lo..x_hi {
            let dx = x as f64 + 0.5 - cx;
            let u = dx * cos + dy * sin;
            let v = -dx * sin + dy * cos;
            if (u / a).powi(2) + (v / b).powi(2) <= 1.0 {
                mask.set(x, y, true);
            }
        }
    }
    mask
}

/// Rasterizes every ellipse and removes from each the pixels already claimed
/// by ellipses with a strictly lower z-order. Masks come back in input order
/// and are pairwise disjoint.
pub fn rasterize_scene_masks(layers: &[(u32, EllipseState)], width: usize, height: usize) -> Vec<Mask> {
    let mut order: Vec<usize> = (0..layers.len()).collect();
    order.sort_by_key(|&i| layers[i].0);
    let mut taken = Mask::empty(width, height);
    let mut masks = vec![Mask::empty(width, height); layers.len()];
    for i in order {
        let mut m = rasterize_ellipse(&layers[i].1, width, height);
        for (bit, &t) in m.bits.iter_mut().zip(&taken.bits) {
            *bit &= !t;
        }
        taken.union_with(&m);
        masks[i] = m;
    }
    masks
}
