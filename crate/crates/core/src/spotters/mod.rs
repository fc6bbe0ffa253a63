//! Unsupervised spotting baselines.
//!
//! Every spotter turns a video into a per-frame [`ScoreCurve`], picks apex
//! frames with [`threshold_peaks`] and emits fixed-length detections, which
//! are thinned by [`nms`].

mod apex;
mod chi2;
mod landmark;
pub mod lbp;
mod mdmd;

pub use apex::{difference_energy, feature_engineering_apex, windowed_sums};
pub use chi2::{chi2_contrast_curve, chi2_distance, spot_lbp_chi2};
pub use landmark::{landmark_curve, landmark_ratios, spot_landmarks, LANDMARK_RATIOS};
pub use lbp::lbp_block_histograms;
pub use mdmd::{block_flow, direction_bin, main_direction_feature, mdmd_curve, spot_mdmd};

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::Detection;

pub const DEFAULT_WINDOW: usize = 35;
pub const DEFAULT_HALF_WINDOW: usize = 17;
pub const DEFAULT_LBP_GRID: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct SpotterConfig {
    /// Detection window length `L`.
    pub window: usize,
    /// Half window `h` used by the windowed feature sums.
    pub half_window: usize,
    pub lbp_grid: usize,
    pub lbp_neighbors: usize,
    pub lbp_radius: usize,
    /// Peak threshold `mean + p * (max - mean)`.
    pub peak_fraction: f64,
    pub mdmd_k: usize,
    pub mdmd_bins: usize,
    pub mdmd_search_radius: usize,
    pub landmark_window: usize,
}

impl Default for SpotterConfig {
    fn default() -> Self {
        SpotterConfig {
            window: DEFAULT_WINDOW,
            half_window: DEFAULT_HALF_WINDOW,
            lbp_grid: DEFAULT_LBP_GRID,
            lbp_neighbors: 8,
            lbp_radius: 1,
            peak_fraction: 0.5,
            mdmd_k: DEFAULT_WINDOW / 2,
            mdmd_bins: 8,
            mdmd_search_radius: 3,
            landmark_window: DEFAULT_WINDOW,
        }
    }
}

impl SpotterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 3 {
            return Err(Error::Config(format!("window {} < 3", self.window)));
        }
        if self.half_window < 1 || self.half_window > self.window {
            return Err(Error::Config(format!(
                "half_window {} outside [1, {}]",
                self.half_window, self.window
            )));
        }
        if self.lbp_grid == 0 || self.mdmd_bins == 0 || self.mdmd_k == 0 || self.landmark_window < 3 {
            return Err(Error::Config(
                "grids, bins, mdmd_k and landmark_window must be positive".into(),
            ));
        }
        if (self.lbp_neighbors, self.lbp_radius) != (8, 1) {
            return Err(Error::Config(format!(
                "only 8-neighbour radius-1 LBP is implemented (got {}/{})",
                self.lbp_neighbors, self.lbp_radius
            )));
        }
        if !(0.0..=1.0).contains(&self.peak_fraction) {
            return Err(Error::Config(format!(
                "peak_fraction {} outside [0, 1]",
                self.peak_fraction
            )));
        }
        Ok(())
    }
}

/// Per-frame spotting score of one video. Margins where the score is
/// undefined hold 0, so the curve is as long as the video.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreCurve {
    pub video_id: String,
    pub values: Vec<f64>,
}

/// Apex frames of a curve: frames scoring strictly above
/// `T = mean + p * (max - mean)` that are the maximum of their
/// `±⌊L/2⌋` neighbourhood. On a plateau only the earliest frame counts.
pub fn threshold_peaks(curve: &ScoreCurve, cfg: &SpotterConfig) -> Vec<(usize, f64)> {
    let v = &curve.values;
    if v.is_empty() {
        return Vec::new();
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let threshold = mean + cfg.peak_fraction * (max - mean);
    let radius = cfg.window / 2;

    let mut peaks = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        if x <= threshold {
            continue;
        }
        let lo = i.saturating_sub(radius);
        let hi = (i + radius).min(v.len() - 1);
        let before_ok = v[lo..i].iter().all(|&y| y < x);
        let after_ok = v[i + 1..=hi].iter().all(|&y| y <= x);
        if before_ok && after_ok {
            peaks.push((i, x));
        }
    }
    peaks
}

/// Turns apex frames into fixed-length detections and thins them with NMS.
pub(crate) fn peaks_to_detections(curve: &ScoreCurve, cfg: &SpotterConfig) -> Vec<Detection> {
    let dets: Vec<Detection> = threshold_peaks(curve, cfg)
        .into_iter()
        .map(|(apex, score)| Detection {
            video_id: curve.video_id.clone(),
            center: apex,
            length: cfg.window,
            score,
        })
        .collect();
    nms(&dets, cfg.window)
}

/// Keeps at most one detection per `spacing` frames: detections are visited
/// by descending score (ties to the lower center) and kept only when their
/// center is at least `spacing` frames from every kept center. The result is
/// ordered by center.
pub fn nms(dets: &[Detection], spacing: usize) -> Vec<Detection> {
    let mut order: Vec<&Detection> = dets.iter().collect();
    order.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then(a.center.cmp(&b.center))
            .then(a.length.cmp(&b.length))
    });
    let mut kept: Vec<Detection> = Vec::new();
    for d in order {
        if kept.iter().all(|k| k.center.abs_diff(d.center) >= spacing) {
            kept.push(d.clone());
        }
    }
    kept.sort_by(|a, b| a.center.cmp(&b.center).then(b.score.total_cmp(&a.score)));
    kept
}
