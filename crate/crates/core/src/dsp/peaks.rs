use crate::error::{Error, Result};

/// Local maxima of `x`, at least `min_distance` apart.
///
/// A candidate is an interior sample strictly greater than both neighbours,
/// or the lower-middle sample of a flat run whose outer neighbours are both
/// strictly lower. Candidates are taken greedily by descending height (ties
/// to the lower index) and any candidate closer than `min_distance` to an
/// accepted one is dropped. The result is sorted.
pub fn detect_peaks(x: &[f64], min_distance: usize) -> Vec<usize> {
    let min_distance = min_distance.max(1);
    let n = x.len();
    let mut candidates = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if x[i] > x[i - 1] {
            let mut j = i;
            while j + 1 < n && x[j + 1] == x[i] {
                j += 1;
            }
            if j + 1 < n && x[j + 1] < x[i] {
                candidates.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    candidates.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));

    let mut blocked = vec![false; n];
    let mut peaks = Vec::new();
    for c in candidates {
        if blocked[c] {
            continue;
        }
        peaks.push(c);
        let lo = c.saturating_sub(min_distance - 1);
        let hi = (c + min_distance).min(n);
        blocked[lo..hi].fill(true);
    }
    peaks.sort_unstable();
    peaks
}

/// Cycles per minute from the span between the first and last peak.
pub fn rate_from_peaks(peaks: &[usize], fs: f64) -> Result<f64> {
    if peaks.len() < 2 {
        return Err(Error::InsufficientPeaks { found: peaks.len() });
    }
    let span = (peaks[peaks.len() - 1] as f64 - peaks[0] as f64) / fs;
    if span <= 0.0 {
        return Err(Error::param("peak indices must be increasing"));
    }
    Ok(60.0 * (peaks.len() - 1) as f64 / span)
}
