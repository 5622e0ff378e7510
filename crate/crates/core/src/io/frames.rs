use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::video::Video;

/// Loads a directory of grayscale PNG frames whose file stems are frame
/// indices (`000000.png`, `000001.png`, ...). Samples are min-max normalized
/// to `[0, 1]` over the whole video.
pub fn read_frame_dir(dir: &Path, fs: f64) -> Result<Video> {
    let mut files: Vec<(usize, PathBuf)> = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()).map(|e| e.eq_ignore_ascii_case("png")) != Some(true) {
            continue;
        }
        let index = path
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| Error::Format(format!("{}: file name is not a frame index", path.display())))?;
        files.push((index, path));
    }
    files.sort();
    if files.is_empty() {
        return Err(Error::Format(format!("{}: no PNG frames", dir.display())));
    }
    if let Some(i) = files.iter().enumerate().position(|(i, (idx, _))| *idx != i) {
        return Err(Error::Format(format!("frame index {i} is missing from {}", dir.display())));
    }
    let mut raw: Vec<u16> = Vec::new();
    let (mut width, mut height) = (0, 0);
    for (i, (_, path)) in files.iter().enumerate() {
        let img = image::open(path)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?
            .into_luma16();
        let (w, h) = (img.width() as usize, img.height() as usize);
        if i == 0 {
            (width, height) = (w, h);
        } else if (w, h) != (width, height) {
            return Err(Error::Format(format!(
                "{}: frame is {w}x{h}, expected {width}x{height}",
                path.display()
            )));
        }
        raw.extend_from_slice(img.as_raw());
    }
    let lo = *raw.iter().min().unwrap() as f64;
    let hi = *raw.iter().max().unwrap() as f64;
    let span = if hi > lo { hi - lo } else { 1.0 };
    let data = raw.iter().map(|&v| ((v as f64 - lo) / span) as f32).collect();
    Video::new(width, height, files.len(), fs, data)
}
