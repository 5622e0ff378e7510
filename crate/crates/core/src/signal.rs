//! Periodic target and distractor signals that drive blob intensities.
//!
//! A [`SignalSpec`] maps a frame index to an intensity in `[0, 1]`. Every
//! family is built from a unit waveform on one period that starts at its
//! minimum, which is then stretched onto `[amp_min, amp_max]`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed frequency interval in Hz. Used as the prior for target signals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyRange {
    pub min_hz: f64,
    pub max_hz: f64,
}

impl FrequencyRange {
    /// `min_hz == max_hz` is accepted and pins the frequency.
    pub fn new(min_hz: f64, max_hz: f64) -> Result<Self> {
        let range = Self { min_hz, max_hz };
        range.validate()?;
        Ok(range)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_hz.is_finite() && self.max_hz.is_finite()) {
            return Err(Error::param("frequency range must be finite"));
        }
        if self.min_hz <= 0.0 || self.min_hz > self.max_hz {
            return Err(Error::param(format!(
                "frequency range [{}, {}] must satisfy 0 < min <= max",
                self.min_hz, self.max_hz
            )));
        }
        Ok(())
    }

    pub fn contains(&self, hz: f64) -> bool {
        hz >= self.min_hz && hz <= self.max_hz
    }

    pub fn width(&self) -> f64 {
        self.max_hz - self.min_hz
    }

    /// Bounded stand-in for the complement of the range: a low band
    /// `[min/4, 0.9 min]` and a high band `[1.1 max, 4 max]`.
    pub fn distractor_bands(&self) -> [FrequencyRange; 2] {
        [
            FrequencyRange {
                min_hz: self.min_hz / 4.0,
                max_hz: 0.9 * self.min_hz,
            },
            FrequencyRange {
                min_hz: 1.1 * self.max_hz,
                max_hz: 4.0 * self.max_hz,
            },
        ]
    }
}

impl std::fmt::Display for FrequencyRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}] Hz", self.min_hz, self.max_hz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalFamily {
    Sin,
    Step,
    Triangle,
    Gaussian,
}

impl SignalFamily {
    pub const ALL: [SignalFamily; 4] = [
        SignalFamily::Sin,
        SignalFamily::Step,
        SignalFamily::Triangle,
        SignalFamily::Gaussian,
    ];

    /// Unit waveform at phase `u` in `[0, 1)`. Minimum at `u = 0`, maximum
    /// at `u = 0.5`.
    pub fn unit(self, u: f64) -> f64 {
        match self {
            SignalFamily::Sin => 0.5 - 0.5 * (2.0 * PI * u).cos(),
            SignalFamily::Step => {
                if u >= 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            SignalFamily::Triangle => 1.0 - (2.0 * u - 1.0).abs(),
            SignalFamily::Gaussian => {
                // one bump per period, std = period / 8
                let z = (u - 0.5) * 8.0;
                (-0.5 * z * z).exp()
            }
        }
    }
}

/// Half-open frame interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameInterval {
    pub start: usize,
    pub end: usize,
}

impl FrameInterval {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, t: usize) -> bool {
        t >= self.start && t < self.end
    }
}

/// Checks that intervals fit inside `len` frames and do not overlap.
pub fn validate_intervals(intervals: &[FrameInterval], len: usize) -> Result<()> {
    let mut sorted: Vec<_> = intervals.iter().filter(|iv| !iv.is_empty()).collect();
    sorted.sort_by_key(|iv| iv.start);
    for iv in &sorted {
        if iv.end > len {
            return Err(Error::param(format!(
                "interval [{}, {}) exceeds series length {len}",
                iv.start, iv.end
            )));
        }
    }
    for pair in sorted.windows(2) {
        if pair[1].start < pair[0].end {
            return Err(Error::param(format!(
                "intervals [{}, {}) and [{}, {}) overlap",
                pair[0].start, pair[0].end, pair[1].start, pair[1].end
            )));
        }
    }
    Ok(())
}

/// One periodic intensity signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub family: SignalFamily,
    pub period_frames: f64,
    pub phase_frames: f64,
    pub amp_min: f64,
    pub amp_max: f64,
    pub flatten_intervals: Vec<FrameInterval>,
    pub noise_std: f64,
}

impl SignalSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.period_frames.is_finite() && self.period_frames > 0.0) {
            return Err(Error::param("period_frames must be positive"));
        }
        if !(0.0..=1.0).contains(&self.amp_min)
            || !(0.0..=1.0).contains(&self.amp_max)
            || self.amp_min > self.amp_max
        {
            return Err(Error::param(format!(
                "amplitude bounds [{}, {}] must lie in [0, 1] with min <= max",
                self.amp_min, self.amp_max
            )));
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::param("noise_std must be non-negative"));
        }
        validate_intervals(&self.flatten_intervals, usize::MAX)
    }

    pub fn frequency_hz(&self, fs: f64) -> f64 {
        fs / self.period_frames
    }

    pub fn rate_bpm(&self, fs: f64) -> f64 {
        60.0 * self.frequency_hz(fs)
    }

    /// Noise-free periodic value, ignoring flattening.
    pub fn periodic_value(&self, t: f64) -> f64 {
        let u = ((t + self.phase_frames) / self.period_frames).rem_euclid(1.0);
        self.amp_min + (self.amp_max - self.amp_min) * self.family.unit(u)
    }

    /// Noise-free value at frame `t`; inside a flatten interval the value at
    /// the interval start is held.
    pub fn value_at(&self, t: f64) -> f64 {
        for iv in &self.flatten_intervals {
            if t >= iv.start as f64 && t < iv.end as f64 {
                return self.periodic_value(iv.start as f64);
            }
        }
        self.periodic_value(t)
    }

    /// Value at `t` with additive Gaussian noise, clamped to `[0, 1]`.
    pub fn sample_at<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> f64 {
        let clean = self.value_at(t);
        let noisy = if self.noise_std > 0.0 {
            clean + self.noise_std * rng.sample::<f64, _>(rand_distr::StandardNormal)
        } else {
            clean
        };
        noisy.clamp(0.0, 1.0)
    }

    /// Renders `len` frames: periodic values, flattening, then noise and clamping.
    pub fn render<R: Rng + ?Sized>(&self, len: usize, fs: f64, rng: &mut R) -> Result<TimeSeries> {
        let clean: Vec<f64> = (0..len).map(|t| self.periodic_value(t as f64)).collect();
        let flat = apply_flattening(&TimeSeries::new(clean, fs)?, &self.flatten_intervals)?;
        let values = flat
            .values
            .into_iter()
            .map(|v| {
                let noisy = if self.noise_std > 0.0 {
                    v + self.noise_std * rng.sample::<f64, _>(rand_distr::StandardNormal)
                } else {
                    v
                };
                noisy.clamp(0.0, 1.0)
            })
            .collect();
        TimeSeries::new(values, fs)
    }

    /// Frames (rounded) at which the unit waveform peaks, i.e. cycle maxima,
    /// within `[0, len)`.
    pub fn cycle_peak_times(&self, len: usize) -> Vec<usize> {
        let p = self.period_frames;
        // u = 0.5  <=>  t = (k + 0.5) p - phase
        let mut k = ((self.phase_frames / p) - 0.5).floor();
        let mut out = Vec::new();
        loop {
            let t = (k + 0.5) * p - self.phase_frames;
            if t >= len as f64 - 0.5 {
                break;
            }
            if t >= -0.5 {
                out.push(t.round().max(0.0) as usize);
            }
            k += 1.0;
        }
        out.dedup();
        out
    }

    pub fn to_doc(&self, fs: f64) -> SignalDoc {
        SignalDoc {
            family: self.family,
            freq_hz: self.frequency_hz(fs),
            amp_min: self.amp_min,
            amp_max: self.amp_max,
            phase_frames: self.phase_frames,
            noise_std: self.noise_std,
            flatten_intervals: self.flatten_intervals.clone(),
        }
    }

    pub fn from_doc(doc: &SignalDoc, fs: f64) -> Result<Self> {
        if !(doc.freq_hz > 0.0) {
            return Err(Error::param("freq_hz must be positive"));
        }
        let spec = SignalSpec {
            family: doc.family,
            period_frames: fs / doc.freq_hz,
            phase_frames: doc.phase_frames,
            amp_min: doc.amp_min,
            amp_max: doc.amp_max,
            flatten_intervals: doc.flatten_intervals.clone(),
            noise_std: doc.noise_std,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Serialized form of a [`SignalSpec`]; the period is carried as a frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalDoc {
    pub family: SignalFamily,
    pub freq_hz: f64,
    pub amp_min: f64,
    pub amp_max: f64,
    pub phase_frames: f64,
    pub noise_std: f64,
    #[serde(default)]
    pub flatten_intervals: Vec<FrameInterval>,
}

/// Signal-level augmentation knobs applied when sampling specs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SignalAugmentation {
    pub noise_std: f64,
    /// Probability that a signal gets one flattened interval.
    pub flatten_prob: f64,
    /// Longest flattened interval as a fraction of the video length.
    pub flatten_max_frac: f64,
}

impl Default for SignalAugmentation {
    fn default() -> Self {
        Self {
            noise_std: 0.02,
            flatten_prob: 0.25,
            flatten_max_frac: 0.2,
        }
    }
}

impl SignalAugmentation {
    pub fn none() -> Self {
        Self {
            noise_std: 0.0,
            flatten_prob: 0.0,
            flatten_max_frac: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_std >= 0.0)
            || !(0.0..=1.0).contains(&self.flatten_prob)
            || !(0.0..=1.0).contains(&self.flatten_max_frac)
        {
            return Err(Error::param(format!("invalid signal augmentation {self:?}")));
        }
        Ok(())
    }
}

fn sample_with_frequency<R: Rng + ?Sized>(
    rng: &mut R,
    freq_hz: f64,
    fs: f64,
    length: usize,
    aug: &SignalAugmentation,
) -> SignalSpec {
    let family = SignalFamily::ALL[rng.gen_range(0..SignalFamily::ALL.len())];
    let period_frames = fs / freq_hz;
    let phase_frames = rng.gen_range(0.0..1.0) * period_frames;
    let a: f64 = rng.gen_range(0.0..=1.0);
    let b: f64 = rng.gen_range(0.0..=1.0);
    let (amp_min, amp_max) = if a <= b { (a, b) } else { (b, a) };

    let mut flatten_intervals = Vec::new();
    if aug.flatten_prob > 0.0 && rng.gen_bool(aug.flatten_prob) {
        let max_len = ((aug.flatten_max_frac * length as f64) as usize).min(length);
        if max_len >= 1 {
            let len = rng.gen_range(1..=max_len);
            let start = rng.gen_range(0..=length - len);
            flatten_intervals.push(FrameInterval::new(start, start + len));
        }
    }

    SignalSpec {
        family,
        period_frames,
        phase_frames,
        amp_min,
        amp_max,
        flatten_intervals,
        noise_std: aug.noise_std,
    }
}

fn check_sampling(fs: f64, length: usize) -> Result<()> {
    if !(fs.is_finite() && fs > 0.0) {
        return Err(Error::param(format!("sampling rate {fs} must be positive")));
    }
    if length == 0 {
        return Err(Error::param("signal length must be positive"));
    }
    Ok(())
}

/// Samples a target signal whose frequency is uniform over `range`.
pub fn sample_signal_spec<R: Rng + ?Sized>(
    rng: &mut R,
    range: &FrequencyRange,
    fs: f64,
    length: usize,
    aug: &SignalAugmentation,
) -> Result<SignalSpec> {
    range.validate()?;
    check_sampling(fs, length)?;
    aug.validate()?;
    let freq = if range.min_hz == range.max_hz {
        range.min_hz
    } else {
        rng.gen_range(range.min_hz..=range.max_hz)
    };
    Ok(sample_with_frequency(rng, freq, fs, length, aug))
}

/// Samples a distractor whose frequency lies outside `excluded`, drawn from
/// [`FrequencyRange::distractor_bands`] with mass proportional to band width.
pub fn sample_distractor_spec<R: Rng + ?Sized>(
    rng: &mut R,
    excluded: &FrequencyRange,
    fs: f64,
    length: usize,
    aug: &SignalAugmentation,
) -> Result<SignalSpec> {
    excluded.validate()?;
    check_sampling(fs, length)?;
    aug.validate()?;
    let [low, high] = excluded.distractor_bands();
    let total = low.width() + high.width();
    let pick = rng.gen_range(0.0..total);
    let band = if pick < low.width() { low } else { high };
    let freq = rng.gen_range(band.min_hz..=band.max_hz);
    Ok(sample_with_frequency(rng, freq, fs, length, aug))
}

/// Uniformly sampled real series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub values: Vec<f64>,
    pub fs: f64,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, fs: f64) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::param(format!("sampling rate {fs} must be positive")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("time series sample {i}")));
        }
        Ok(Self { values, fs })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        TimeSeries::new(values, self.fs)
    }

    pub fn slice(&self, start: usize, end: usize) -> TimeSeries {
        TimeSeries {
            values: self.values[start..end].to_vec(),
            fs: self.fs,
        }
    }
}

/// Holds the value at each interval start across the interval.
pub fn apply_flattening(series: &TimeSeries, intervals: &[FrameInterval]) -> Result<TimeSeries> {
    validate_intervals(intervals, series.len())?;
    let mut values = series.values.clone();
    for iv in intervals.iter().filter(|iv| !iv.is_empty()) {
        let held = values[iv.start];
        values[iv.start..iv.end].fill(held);
    }
    Ok(TimeSeries {
        values,
        fs: series.fs,
    })
}
