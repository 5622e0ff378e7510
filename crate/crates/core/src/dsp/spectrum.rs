use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::{FrequencyRange, TimeSeries};

fn fft(values: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Absolute frequency of DFT bin `k` for an `n`-point transform.
pub fn bin_frequency(k: usize, n: usize, fs: f64) -> f64 {
    let k = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
    (k * fs / n as f64).abs()
}

/// Ideal band-pass: zeroes every DFT bin whose absolute frequency lies outside
/// `[f_lo, f_hi]` and returns the real part of the inverse transform.
pub fn bandpass(series: &TimeSeries, f_lo: f64, f_hi: f64) -> Result<TimeSeries> {
    let nyquist = series.fs / 2.0;
    if !(f_lo > 0.0 && f_lo < f_hi && f_hi < nyquist) {
        return Err(Error::param(format!(
            "band [{f_lo}, {f_hi}] Hz must satisfy 0 < lo < hi < {nyquist}"
        )));
    }
    let n = series.len();
    if n == 0 {
        return series.with_values(Vec::new());
    }
    let mut spec = fft(&series.values);
    for (k, c) in spec.iter_mut().enumerate() {
        let f = bin_frequency(k, n, series.fs);
        if f < f_lo || f > f_hi {
            *c = Complex::new(0.0, 0.0);
        }
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    series.with_values(spec.iter().map(|c| c.re / n as f64).collect())
}

/// Magnitudes of the one-sided spectrum, bins `0..=n/2`.
pub fn magnitude_spectrum(values: &[f64]) -> Vec<f64> {
    let spec = fft(values);
    spec[..values.len() / 2 + 1].iter().map(|c| c.norm()).collect()
}

/// Index of the largest one-sided DFT magnitude among bins whose frequency
/// lies in `band`. Ties go to the lower bin.
pub fn dominant_bin(series: &TimeSeries, band: &FrequencyRange) -> Result<usize> {
    band.validate()?;
    let n = series.len();
    if n < 2 {
        return Err(Error::param("need at least 2 samples for a spectral rate"));
    }
    let mags = magnitude_spectrum(&series.values);
    let mut best: Option<(usize, f64)> = None;
    for (k, &m) in mags.iter().enumerate() {
        if !band.contains(bin_frequency(k, n, series.fs)) {
            continue;
        }
        if best.map_or(true, |(_, b)| m > b) {
            best = Some((k, m));
        }
    }
    best.map(|(k, _)| k)
        .ok_or_else(|| Error::param(format!("no DFT bin of a {n}-sample series falls in {band}")))
}

/// Rate in cycles per minute at the strongest in-band DFT bin.
pub fn dft_rate(series: &TimeSeries, band: &FrequencyRange) -> Result<f64> {
    let k = dominant_bin(series, band)?;
    Ok(60.0 * bin_frequency(k, series.len(), series.fs))
}
