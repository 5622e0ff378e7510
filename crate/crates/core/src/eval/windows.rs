use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dsp::{detect_peaks, rate_from_peaks};
use crate::error::{Error, Result};
use crate::signal::{SignalSpec, TimeSeries};

/// Reference cycle events (inspiration onsets, beats, cycle maxima).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateAnnotation {
    pub event_times: Vec<usize>,
    pub fs: f64,
}

impl RateAnnotation {
    pub fn new(event_times: Vec<usize>, fs: f64) -> Result<Self> {
        if !(fs > 0.0 && fs.is_finite()) {
            return Err(Error::param(format!("sampling rate {fs} must be positive")));
        }
        if event_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("annotation events must be strictly increasing"));
        }
        Ok(Self { event_times, fs })
    }

    /// Events at the cycle maxima of an analytic signal.
    pub fn from_spec(spec: &SignalSpec, len: usize, fs: f64) -> Result<Self> {
        Self::new(spec.cycle_peak_times(len), fs)
    }

    /// Events at the detected peaks of a reference series.
    pub fn from_series(series: &TimeSeries, min_distance: usize) -> Result<Self> {
        Self::new(detect_peaks(&series.values, min_distance), series.fs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowOptions {
    /// Counting window, frames.
    pub window: usize,
    /// Distance between window starts; `None` means `window` (no overlap).
    pub stride: Option<usize>,
    /// Reporting unit, frames. Only labels the report; rates are always
    /// cycles per minute.
    pub report_window: usize,
    pub min_peak_distance: usize,
}

impl Default for WindowOptions {
    fn default() -> Self {
        Self::respiration(27.0)
    }
}

impl WindowOptions {
    /// 1000-frame counting windows.
    pub fn respiration(fs: f64) -> Self {
        Self {
            window: 1000,
            stride: None,
            report_window: (60.0 * fs).round() as usize,
            min_peak_distance: 40,
        }
    }

    /// 250-frame counting windows.
    pub fn heart(fs: f64) -> Self {
        Self {
            window: 250,
            ..Self::respiration(fs)
        }
    }

    pub fn stride(&self) -> usize {
        self.stride.unwrap_or(self.window)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    pub start: usize,
    pub predicted_bpm: f64,
    pub reference_bpm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl WindowResult {
    pub fn abs_error(&self) -> f64 {
        (self.predicted_bpm - self.reference_bpm).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub mae: f64,
    pub std: f64,
    pub windows: usize,
}

impl ErrorStats {
    /// Mean and population standard deviation of absolute errors.
    pub fn from_errors(errors: &[f64]) -> Self {
        let n = errors.len();
        if n == 0 {
            return Self {
                mae: 0.0,
                std: 0.0,
                windows: 0,
            };
        }
        let mae = errors.iter().sum::<f64>() / n as f64;
        let var = errors.iter().map(|e| (e - mae).powi(2)).sum::<f64>() / n as f64;
        Self {
            mae,
            std: var.sqrt(),
            windows: n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mae: f64,
    pub std: f64,
    pub report_window: usize,
    pub per_window: Vec<WindowResult>,
    /// Per-label statistics, present when window labels were supplied.
    pub groups: BTreeMap<String, ErrorStats>,
    pub extras: BTreeMap<String, f64>,
}

impl MetricsReport {
    /// Builds a report from finished windows; grouping follows their labels.
    pub fn from_windows(per_window: Vec<WindowResult>, report_window: usize) -> Self {
        let errors: Vec<f64> = per_window.iter().map(WindowResult::abs_error).collect();
        let all = ErrorStats::from_errors(&errors);
        let mut by_label: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for w in &per_window {
            if let Some(l) = &w.label {
                by_label.entry(l.clone()).or_default().push(w.abs_error());
            }
        }
        Self {
            mae: all.mae,
            std: all.std,
            report_window,
            per_window,
            groups: by_label.into_iter().map(|(k, v)| (k, ErrorStats::from_errors(&v))).collect(),
            extras: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Flat per-window CSV with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("window_start,predicted_bpm,reference_bpm,abs_error,label\n");
        for w in &self.per_window {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                w.start,
                w.predicted_bpm,
                w.reference_bpm,
                w.abs_error(),
                w.label.as_deref().unwrap_or("")
            ));
        }
        out
    }
}

/// Slides a counting window over the prediction and compares per-window
/// peak rates against the annotation.
///
/// Windows whose reference holds fewer than two events are skipped for both
/// sides and counted in `extras["skipped_windows"]`. A prediction with fewer
/// than two peaks scores 0 cycles per minute and is counted in
/// `extras["pred_insufficient_peaks"]`. `labels`, when given, holds one label
/// per window.
pub fn windowed_rate_eval(
    pred: &TimeSeries,
    annotation: &RateAnnotation,
    opts: &WindowOptions,
    labels: Option<&[String]>,
) -> Result<MetricsReport> {
    if opts.window == 0 || opts.stride() == 0 {
        return Err(Error::param("window and stride must be positive"));
    }
    if opts.window > pred.len() {
        return Err(Error::param(format!(
            "window of {} frames exceeds the {}-frame series",
            opts.window,
            pred.len()
        )));
    }
    let starts: Vec<usize> = (0..=pred.len() - opts.window).step_by(opts.stride()).collect();
    if let Some(l) = labels {
        if l.len() != starts.len() {
            return Err(Error::Shape(format!("{} labels for {} windows", l.len(), starts.len())));
        }
    }
    let mut windows = Vec::new();
    let (mut skipped, mut insufficient) = (0usize, 0usize);
    for (i, &s) in starts.iter().enumerate() {
        let e = s + opts.window;
        let events: Vec<usize> = annotation
            .event_times
            .iter()
            .filter(|&&t| t >= s && t < e)
            .map(|&t| t - s)
            .collect();
        let reference_bpm = match rate_from_peaks(&events, annotation.fs) {
            Ok(r) => r,
            Err(Error::InsufficientPeaks { .. }) => {
                skipped += 1;
                continue;
            }
            Err(err) => return Err(err),
        };
        let peaks = detect_peaks(&pred.values[s..e], opts.min_peak_distance);
        let predicted_bpm = match rate_from_peaks(&peaks, pred.fs) {
            Ok(r) => r,
            Err(Error::InsufficientPeaks { .. }) => {
                insufficient += 1;
                0.0
            }
            Err(err) => return Err(err),
        };
        windows.push(WindowResult {
            start: s,
            predicted_bpm,
            reference_bpm,
            label: labels.map(|l| l[i].clone()),
        });
    }
    let mut report = MetricsReport::from_windows(windows, opts.report_window);
    report.extras.insert("skipped_windows".into(), skipped as f64);
    report.extras.insert("pred_insufficient_peaks".into(), insufficient as f64);
    Ok(report)
}

/// Aligned text table with one row per method and MAE/STD column pairs per
/// group (`All` when the reports carry no labels).
pub fn render_table(rows: &[(&str, &MetricsReport)]) -> String {
    let mut groups: Vec<String> = Vec::new();
    for (_, r) in rows {
        for g in r.groups.keys() {
            if !groups.contains(g) {
                groups.push(g.clone());
            }
        }
    }
    let name_w = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(6);
    let mut out = format!("{:name_w$}", "");
    if groups.is_empty() {
        out.push_str(&format!(" | {:^15}", "All"));
    }
    for g in &groups {
        out.push_str(&format!(" | {:^15}", g));
    }
    out.push('\n');
    out.push_str(&format!("{:name_w$}", "method"));
    for _ in 0..groups.len().max(1) {
        out.push_str(&format!(" | {:>7} {:>7}", "MAE", "STD"));
    }
    out.push('\n');
    for (name, r) in rows {
        out.push_str(&format!("{name:name_w$}"));
        if groups.is_empty() {
            out.push_str(&format!(" | {:>7.2} {:>7.2}", r.mae, r.std));
        }
        for g in &groups {
            match r.groups.get(g) {
                Some(s) => out.push_str(&format!(" | {:>7.2} {:>7.2}", s.mae, s.std)),
                None => out.push_str(&format!(" | {:>7} {:>7}", "-", "-")),
            }
        }
        out.push('\n');
    }
    out
}
