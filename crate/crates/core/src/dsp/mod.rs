//! Classical rate estimation: ROI averaging, DoG detrending, normalization,
//! ideal band-pass, and either a spectral or a peak-counting rate.

mod detrend;
mod peaks;
mod roi;
mod spectrum;

pub use detrend::{dog_bandpass, dog_detrend, normalize};
pub use peaks::{detect_peaks, rate_from_peaks};
pub use roi::{boxes_from_masks, mean_roi_signal};
pub use spectrum::{bandpass, bin_frequency, dft_rate, dominant_bin, magnitude_spectrum};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{FrequencyRange, TimeSeries};
use crate::video::{Rect, Video};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateMethod {
    Dft,
    Peaks,
}

impl std::str::FromStr for RateMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "dft" => Ok(RateMethod::Dft),
            "peaks" => Ok(RateMethod::Peaks),
            other => Err(format!("unknown rate method `{other}` (expected dft or peaks)")),
        }
    }
}

/// How the difference of Gaussians is applied before normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetrendMode {
    /// `x - DoG(x)`, see [`dog_detrend`].
    SubtractDog,
    /// `DoG(x)`, see [`dog_bandpass`].
    DogBandpass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineConfig {
    pub detrend: DetrendMode,
    pub sigma_narrow: f64,
    pub sigma_wide: f64,
    pub band: FrequencyRange,
    pub method: RateMethod,
    pub min_peak_distance: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        // x - DoG(x) with wide sigmas notches out the 0.1-0.8 Hz band at
        // 27 fps, so the default keeps the DoG response instead
        Self {
            detrend: DetrendMode::DogBandpass,
            sigma_narrow: 2.0,
            sigma_wide: 20.0,
            band: FrequencyRange {
                min_hz: 0.1,
                max_hz: 0.8,
            },
            method: RateMethod::Dft,
            min_peak_distance: 40,
        }
    }
}

impl BaselineConfig {
    /// Checks what can be checked without a series; band edges against the
    /// Nyquist rate and sigma against the length are checked per run.
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_narrow > 0.0 && self.sigma_narrow < self.sigma_wide) {
            return Err(Error::param(format!(
                "need 0 < sigma_narrow ({}) < sigma_wide ({})",
                self.sigma_narrow, self.sigma_wide
            )));
        }
        if self.min_peak_distance == 0 {
            return Err(Error::param("min_peak_distance must be at least 1"));
        }
        self.band.validate()
    }
}

/// Every intermediate series of a baseline run plus the final rate.
#[derive(Debug, Clone)]
pub struct BaselineOutput {
    pub raw: TimeSeries,
    pub detrended: TimeSeries,
    pub normalized: TimeSeries,
    pub filtered: TimeSeries,
    /// Only filled for [`RateMethod::Peaks`].
    pub peaks: Vec<usize>,
    pub rate_bpm: f64,
}

/// Detrend, normalize, band-pass and rate a raw ROI series.
pub fn analyze_series(raw: TimeSeries, cfg: &BaselineConfig) -> Result<BaselineOutput> {
    let detrended = match cfg.detrend {
        DetrendMode::SubtractDog => dog_detrend(&raw, cfg.sigma_narrow, cfg.sigma_wide)?,
        DetrendMode::DogBandpass => dog_bandpass(&raw, cfg.sigma_narrow, cfg.sigma_wide)?,
    };
    let normalized = normalize(&detrended)?;
    let filtered = bandpass(&normalized, cfg.band.min_hz, cfg.band.max_hz)?;
    let (peaks, rate_bpm) = match cfg.method {
        RateMethod::Dft => (Vec::new(), dft_rate(&filtered, &cfg.band)?),
        RateMethod::Peaks => {
            let p = detect_peaks(&filtered.values, cfg.min_peak_distance);
            let r = rate_from_peaks(&p, filtered.fs)?;
            (p, r)
        }
    };
    Ok(BaselineOutput {
        raw,
        detrended,
        normalized,
        filtered,
        peaks,
        rate_bpm,
    })
}

/// Full baseline from frames and per-frame ROI boxes.
pub fn baseline_rate(video: &Video, boxes: &[Rect], cfg: &BaselineConfig) -> Result<BaselineOutput> {
    analyze_series(mean_roi_signal(video, boxes)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn noiseless_sines_recover_rate_both_ways() {
        // one DFT bin for the spectral rate; the peak rate is additionally
        // limited by integer peak positions over the first-to-last span
        let (fs, n) = (27.0, 1000usize);
        for f in [0.15, 0.24, 0.3, 0.41, 0.54, 0.7] {
            let x: Vec<f64> = (0..n).map(|t| 0.5 + 0.3 * (2.0 * PI * f * t as f64 / fs + 0.3).sin()).collect();
            let raw = TimeSeries::new(x, fs).unwrap();
            let dft = analyze_series(raw.clone(), &BaselineConfig::default()).unwrap();
            assert!((dft.rate_bpm - 60.0 * f).abs() <= 60.0 * fs / n as f64, "f={f}: {}", dft.rate_bpm);
            let cfg = BaselineConfig {
                method: RateMethod::Peaks,
                min_peak_distance: 20,
                ..BaselineConfig::default()
            };
            let pk = analyze_series(raw, &cfg).unwrap();
            let period = fs / f;
            let bound = 60.0 * fs / n as f64 + 60.0 * f / (pk.peaks.len() - 1) as f64 / period;
            assert!((pk.rate_bpm - 60.0 * f).abs() <= bound, "f={f}: {}", pk.rate_bpm);
        }
    }

    #[test]
    fn method_parsing() {
        assert_eq!("dft".parse::<RateMethod>().unwrap(), RateMethod::Dft);
        assert_eq!("peaks".parse::<RateMethod>().unwrap(), RateMethod::Peaks);
        assert!("fft".parse::<RateMethod>().is_err());
    }
}
