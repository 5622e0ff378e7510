use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationStats {
    /// `|peak - start| / period` per matched period.
    pub ratios: Vec<f64>,
    /// Periods with no predicted peak inside them.
    pub misses: usize,
    /// `None` when every period was missed.
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub median: Option<f64>,
}

/// Matches every annotated period `[start_i, start_{i+1})` to the predicted
/// peak inside it nearest to `start_i` and reports the offset as a fraction
/// of the period length.
pub fn temporal_localization(pred_peaks: &[usize], gt_starts: &[usize]) -> Result<LocalizationStats> {
    if gt_starts.len() < 2 {
        return Err(Error::param(format!(
            "need at least 2 annotated starts, got {}",
            gt_starts.len()
        )));
    }
    if gt_starts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("annotated starts must be strictly increasing"));
    }
    let mut ratios = Vec::new();
    let mut misses = 0;
    for w in gt_starts.windows(2) {
        let (s, e) = (w[0], w[1]);
        match pred_peaks.iter().filter(|&&p| p >= s && p < e).map(|&p| p - s).min() {
            Some(offset) => ratios.push(offset as f64 / (e - s) as f64),
            None => misses += 1,
        }
    }
    let (mean, std, median) = if ratios.is_empty() {
        (None, None, None)
    } else {
        let n = ratios.len() as f64;
        let mean = ratios.iter().sum::<f64>() / n;
        let std = (ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt();
        let mut sorted = ratios.clone();
        sorted.sort_by(f64::total_cmp);
        let m = sorted.len();
        let median = if m % 2 == 1 {
            sorted[m / 2]
        } else {
            0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
        };
        (Some(mean), Some(std), Some(median))
    };
    Ok(LocalizationStats {
        ratios,
        misses,
        mean,
        std,
        median,
    })
}
