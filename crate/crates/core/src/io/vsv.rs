use std::path::Path;

use crate::error::{Error, Result};
use crate::video::Video;

const MAGIC: &[u8; 4] = b"VSV1";
const DTYPE_F32: u32 = 0;
pub const HEADER_LEN: usize = 24;

/// `VSV1`, then little-endian u32 width, height, frame count, f32 fs,
/// u32 dtype tag (0 = f32), then frame-major, row-major f32 samples.
pub fn encode_vsv(video: &Video) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * video.data.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(video.width as u32).to_le_bytes());
    out.extend_from_slice(&(video.height as u32).to_le_bytes());
    out.extend_from_slice(&(video.num_frames as u32).to_le_bytes());
    out.extend_from_slice(&(video.fs as f32).to_le_bytes());
    out.extend_from_slice(&DTYPE_F32.to_le_bytes());
    for v in &video.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_vsv(bytes: &[u8]) -> Result<Video> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(Error::Format("not a VSV1 container".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let (width, height, frames) = (word(4) as usize, word(8) as usize, word(12) as usize);
    let fs = f32::from_le_bytes(bytes[16..20].try_into().unwrap()) as f64;
    let dtype = word(20);
    if dtype != DTYPE_F32 {
        return Err(Error::Format(format!("unsupported VSV dtype tag {dtype}")));
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(frames))
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::Format("VSV dimensions overflow".into()))?;
    if bytes.len() - HEADER_LEN != expected {
        return Err(Error::Format(format!(
            "VSV payload has {} bytes, header implies {expected}",
            bytes.len() - HEADER_LEN
        )));
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Video::new(width, height, frames, fs, data).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_vsv(path: &Path, video: &Video) -> Result<()> {
    std::fs::write(path, encode_vsv(video)).map_err(|e| Error::io(path, e))
}

pub fn read_vsv(path: &Path) -> Result<Video> {
    decode_vsv(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Video {
        let data: Vec<f32> = (0..5 * 4 * 3).map(|i| (i as f32 * 0.37).fract()).collect();
        Video::new(5, 4, 3, 27.0, data).unwrap()
    }

    #[test]
    fn header_layout() {
        let b = encode_vsv(&sample());
        assert_eq!(&b[..4], b"VSV1");
        assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), 5);
        assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 4);
        assert_eq!(u32::from_le_bytes(b[12..16].try_into().unwrap()), 3);
        assert_eq!(f32::from_le_bytes(b[16..20].try_into().unwrap()), 27.0);
        assert_eq!(u32::from_le_bytes(b[20..24].try_into().unwrap()), 0);
        assert_eq!(b.len(), 24 + 60 * 4);
    }

    #[test]
    fn round_trip_is_exact() {
        let v = sample();
        let bytes = encode_vsv(&v);
        let back = decode_vsv(&bytes).unwrap();
        assert_eq!(back, v);
        assert_eq!(encode_vsv(&back), bytes);
    }

    #[test]
    fn rejects_corrupt_input() {
        let mut b = encode_vsv(&sample());
        assert!(decode_vsv(&b[..30]).is_err());
        b[20] = 3;
        assert!(decode_vsv(&b).is_err());
        b[0] = b'X';
        assert!(decode_vsv(&b).is_err());
    }
}
