//! Evaluation: windowed rate error, temporal localization of cycle onsets,
//! and ROI segmentation scores.

mod localization;
mod roi;
mod windows;

pub use localization::{temporal_localization, LocalizationStats};
pub use roi::{aggregate_roi, roi_metrics, RoiScore, RoiSummary};
pub use windows::{
    render_table, windowed_rate_eval, ErrorStats, MetricsReport, RateAnnotation, WindowOptions, WindowResult,
};
