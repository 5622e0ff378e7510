use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::TimeSeries;
use crate::video::Rect;

/// `# fs=<Hz>` comment, `frame_index,value` header, one row per sample.
pub fn series_to_csv(series: &TimeSeries) -> String {
    let mut out = format!("# fs={}\nframe_index,value\n", series.fs);
    for (i, v) in series.values.iter().enumerate() {
        out.push_str(&format!("{i},{v}\n"));
    }
    out
}

pub fn series_from_csv(text: &str) -> Result<TimeSeries> {
    let mut fs = None;
    let mut values = Vec::new();
    let mut header_seen = false;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        let lineno = n + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("fs=") {
                fs = Some(v.trim().parse::<f64>().map_err(|_| bad(lineno, "invalid fs"))?);
            }
            continue;
        }
        if !header_seen {
            if line != "frame_index,value" {
                return Err(bad(lineno, "expected header `frame_index,value`"));
            }
            header_seen = true;
            continue;
        }
        let (idx, val) = line.split_once(',').ok_or_else(|| bad(lineno, "expected two columns"))?;
        let idx: usize = idx.trim().parse().map_err(|_| bad(lineno, "invalid frame index"))?;
        if idx != values.len() {
            return Err(bad(lineno, "frame indices must be consecutive from 0"));
        }
        values.push(val.trim().parse::<f64>().map_err(|_| bad(lineno, "invalid value"))?);
    }
    let fs = fs.ok_or_else(|| Error::Format("missing `# fs=` line".into()))?;
    TimeSeries::new(values, fs)
}

/// Rows of `frame_index,signal,is_peak` for plotting.
pub fn plot_csv(series: &TimeSeries, peaks: &[usize]) -> String {
    let mut out = format!("# fs={}\nframe_index,signal,is_peak\n", series.fs);
    let mut flags = vec![false; series.len()];
    for &p in peaks {
        if p < flags.len() {
            flags[p] = true;
        }
    }
    for (i, (v, f)) in series.values.iter().zip(flags).enumerate() {
        out.push_str(&format!("{i},{v},{}\n", f as u8));
    }
    out
}

/// One `x0,y0,x1,y1` row per frame, optional header row.
pub fn boxes_to_csv(boxes: &[Rect]) -> String {
    let mut out = String::from("x0,y0,x1,y1\n");
    for b in boxes {
        out.push_str(&format!("{},{},{},{}\n", b.x0, b.y0, b.x1, b.y1));
    }
    out
}

pub fn boxes_from_csv(text: &str) -> Result<Vec<Rect>> {
    let mut boxes = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        let lineno = n + 1;
        if line.is_empty() || line.starts_with('#') || (boxes.is_empty() && line == "x0,y0,x1,y1") {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(bad(lineno, "expected 4 columns x0,y0,x1,y1"));
        }
        let mut v = [0i64; 4];
        for (slot, c) in v.iter_mut().zip(&cols) {
            *slot = c.parse().map_err(|_| bad(lineno, &format!("`{c}` is not an integer")))?;
        }
        if v[2] <= v[0] || v[3] <= v[1] {
            return Err(bad(lineno, "box must have x1 > x0 and y1 > y0"));
        }
        boxes.push(Rect::new(v[0], v[1], v[2], v[3]));
    }
    Ok(boxes)
}

fn bad(line: usize, msg: &str) -> Error {
    Error::Format(format!("line {line}: {msg}"))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
