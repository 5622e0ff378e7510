use crate::error::{Error, Result};
use crate::filter::{convolve_reflect, gaussian_kernel};
use crate::signal::TimeSeries;

/// Removes the difference-of-Gaussians response from the series:
/// `x - (G_narrow * x - G_wide * x)`, unit-sum kernels, reflect padding.
pub fn dog_detrend(series: &TimeSeries, sigma_narrow: f64, sigma_wide: f64) -> Result<TimeSeries> {
    check_sigmas(series, sigma_narrow, sigma_wide)?;
    let narrow = convolve_reflect(&series.values, &gaussian_kernel(sigma_narrow));
    let wide = convolve_reflect(&series.values, &gaussian_kernel(sigma_wide));
    let values = series
        .values
        .iter()
        .zip(narrow.iter().zip(&wide))
        .map(|(x, (n, w))| x - (n - w))
        .collect();
    series.with_values(values)
}

fn check_sigmas(series: &TimeSeries, sigma_narrow: f64, sigma_wide: f64) -> Result<()> {
    if !(sigma_narrow > 0.0 && sigma_narrow < sigma_wide && sigma_wide.is_finite()) {
        return Err(Error::param(format!(
            "DoG sigmas must satisfy 0 < narrow < wide, got {sigma_narrow} and {sigma_wide}"
        )));
    }
    if (series.len() as f64) <= 6.0 * sigma_wide {
        return Err(Error::param(format!(
            "series of {} samples is too short for sigma_wide {sigma_wide} (needs more than {})",
            series.len(),
            6.0 * sigma_wide
        )));
    }
    Ok(())
}

/// The difference-of-Gaussians response itself, `G_narrow * x - G_wide * x`:
/// a band-pass that drops slow drift and sample-scale spikes.
pub fn dog_bandpass(series: &TimeSeries, sigma_narrow: f64, sigma_wide: f64) -> Result<TimeSeries> {
    check_sigmas(series, sigma_narrow, sigma_wide)?;
    let narrow = convolve_reflect(&series.values, &gaussian_kernel(sigma_narrow));
    let wide = convolve_reflect(&series.values, &gaussian_kernel(sigma_wide));
    series.with_values(narrow.iter().zip(&wide).map(|(n, w)| n - w).collect())
}

/// Zero mean, unit population standard deviation.
pub fn normalize(series: &TimeSeries) -> Result<TimeSeries> {
    let n = series.len();
    if n == 0 {
        return Err(Error::Degenerate("empty series".into()));
    }
    let mean = series.values.iter().sum::<f64>() / n as f64;
    let var = series.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let std = var.sqrt();
    // relative floor so rounding noise on a constant series is still caught
    let scale = series.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(std > 1e-12 * scale.max(1e-300)) {
        return Err(Error::Degenerate("series has zero variance".into()));
    }
    series.with_values(series.values.iter().map(|v| (v - mean) / std).collect())
}
