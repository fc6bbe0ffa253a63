//! Dynamic-texture features on three orthogonal planes and the multi-scale
//! sliding-window spotter built on a linear classifier.

mod extract;
mod linear;

pub use extract::{block_ranges, extract_st_feature, PLANES};
pub use linear::{
    format_model, read_model, train_linear, write_model, LinearModel, SpotterModel, TrainParams, TrainTrace,
    MODEL_MAGIC,
};

use std::fmt;
use std::str::FromStr;

use image::GrayImage;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Detection, FrameSequence, GroundTruthSample};
use crate::spotters::lbp::UNIFORM_BINS;
use crate::spotters::nms;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FeatureKind {
    LbpTop,
    HogTop,
    #[default]
    HigoTop,
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureKind::LbpTop => "lbp-top",
            FeatureKind::HogTop => "hog-top",
            FeatureKind::HigoTop => "higo-top",
        })
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lbp-top" => Ok(FeatureKind::LbpTop),
            "hog-top" => Ok(FeatureKind::HogTop),
            "higo-top" => Ok(FeatureKind::HigoTop),
            other => Err(Error::Config(format!(
                "unknown feature kind {other:?} (lbp-top|hog-top|higo-top)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StFeatureConfig {
    pub kind: FeatureKind,
    /// Blocks along x, y and t.
    pub blocks: (usize, usize, usize),
    /// Fraction of its extent a block shares with its neighbour on each axis.
    pub overlap: f64,
    /// Orientation bins for the gradient kinds.
    pub bins: usize,
    /// Frames per feature volume (`L`).
    pub window: usize,
    pub scales: Vec<f64>,
}

impl Default for StFeatureConfig {
    fn default() -> Self {
        StFeatureConfig {
            kind: FeatureKind::HigoTop,
            blocks: (8, 8, 4),
            overlap: 0.2,
            bins: 8,
            window: 35,
            scales: vec![1.0, 0.75, 0.5],
        }
    }
}

impl StFeatureConfig {
    pub fn validate(&self) -> Result<()> {
        let (x, y, t) = self.blocks;
        if x == 0 || y == 0 || t == 0 || self.bins == 0 {
            return Err(Error::Config("block divisions and bins must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::Config(format!("overlap {} outside [0, 1)", self.overlap)));
        }
        if self.window < t || self.window < 2 {
            return Err(Error::Config(format!(
                "window {} too short for {t} temporal blocks",
                self.window
            )));
        }
        if self.scales.is_empty() || self.scales.iter().any(|&s| !(s > 0.0 && s <= 1.0)) {
            return Err(Error::Config(format!("scales {:?} must lie in (0, 1]", self.scales)));
        }
        Ok(())
    }

    pub fn histogram_bins(&self) -> usize {
        match self.kind {
            FeatureKind::LbpTop => UNIFORM_BINS,
            FeatureKind::HogTop | FeatureKind::HigoTop => self.bins,
        }
    }

    pub fn feature_len(&self) -> usize {
        let (x, y, t) = self.blocks;
        x * y * t * PLANES * self.histogram_bins()
    }

    /// Window length at each scale, `round(L * s)`, at least 2 frames.
    pub fn scaled_windows(&self) -> Vec<usize> {
        self.scales
            .iter()
            .map(|s| ((self.window as f64 * s).round() as usize).max(2))
            .collect()
    }
}

pub(crate) fn parse_blocks(s: &str) -> Result<(usize, usize, usize)> {
    let parts: Vec<&str> = s.split('x').map(str::trim).collect();
    let parse = |p: &str| {
        p.parse::<usize>()
            .map_err(|e| Error::Config(format!("blocks {s:?}: {e}")))
    };
    match parts.as_slice() {
        [x, y, t] => Ok((parse(x)?, parse(y)?, parse(t)?)),
        _ => Err(Error::Config(format!("blocks {s:?} must look like 8x8x4"))),
    }
}

pub(crate) fn parse_scales(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("scales {s:?}: {e}")))
        })
        .collect()
}

/// Frames `start .. start + span` resampled to exactly `len` frames by
/// nearest-frame index mapping (endpoints map onto endpoints).
pub fn resample_window(frames: &[GrayImage], start: usize, span: usize, len: usize) -> Vec<&GrayImage> {
    (0..len)
        .map(|j| {
            let offset = if len == 1 {
                0
            } else {
                (j as f64 * (span - 1) as f64 / (len - 1) as f64).round() as usize
            };
            &frames[start + offset]
        })
        .collect()
}

/// Feature of the length-`L` window centered on `center`, clipped to the
/// video.
pub fn window_feature(seq: &FrameSequence, center: usize, cfg: &StFeatureConfig) -> Result<Vec<f64>> {
    let l = cfg.window;
    if seq.len() < l {
        return Err(Error::SequenceTooShort {
            frames: seq.len(),
            required: l,
        });
    }
    let start = center.saturating_sub(l / 2).min(seq.len() - l);
    let volume: Vec<&GrayImage> = seq.frames[start..start + l].iter().collect();
    extract_st_feature(&volume, cfg)
}

/// Multi-scale sliding-window spotting. For each scale `s` the window spans
/// `L_s = round(L s)` frames with stride `ceil(L_s / 4)`, is resampled to `L`
/// frames and scored by the model; windows scoring above 0 become
/// detections of length `L_s`. All scales are thinned together by NMS with
/// spacing `L`.
pub fn spot_supervised(seq: &FrameSequence, model: &SpotterModel, cfg: &StFeatureConfig) -> Result<Vec<Detection>> {
    cfg.validate()?;
    if model.linear.weights.len() != cfg.feature_len() {
        return Err(Error::Config(format!(
            "model expects {} features, configuration produces {}",
            model.linear.weights.len(),
            cfg.feature_len()
        )));
    }
    let n = seq.len();
    let mut windows = Vec::new();
    for span in cfg.scaled_windows() {
        if span > n {
            continue;
        }
        let stride = span.div_ceil(4);
        let mut start = 0;
        while start + span <= n {
            windows.push((start, span));
            start += stride;
        }
    }
    let scored: Vec<Option<Detection>> = windows
        .par_iter()
        .map(|&(start, span)| {
            let volume = resample_window(&seq.frames, start, span, cfg.window);
            let x = extract_st_feature(&volume, cfg)?;
            let score = model.linear.score(&x);
            Ok((score > 0.0).then(|| Detection {
                video_id: seq.video_id.clone(),
                center: start + (span - 1) / 2,
                length: span,
                score,
            }))
        })
        .collect::<Result<_>>()?;
    let dets: Vec<Detection> = scored.into_iter().flatten().collect();
    Ok(nms(&dets, cfg.window))
}

/// Window centers for supervised training on one video: one positive per
/// ground-truth sample and up to `negatives_per_positive` negatives per
/// positive, each negative window lying at least `L` frames away from every
/// ground-truth interval. Returned as `(center, label)`.
pub fn training_centers<R: Rng>(
    frame_count: usize,
    gts: &[GroundTruthSample],
    window: usize,
    negatives_per_positive: usize,
    rng: &mut R,
) -> Vec<(usize, i8)> {
    let mut out: Vec<(usize, i8)> = gts.iter().map(|g| (g.center(), 1)).collect();
    if frame_count < window {
        return out;
    }
    let half = window / 2;
    let lo = half;
    let hi = frame_count - window + half;
    let wanted = negatives_per_positive * gts.len().max(1);
    let far_from_gt = |c: usize| {
        let start = c - half;
        let end = start + window - 1;
        gts.iter()
            .all(|g| end + window <= g.onset || start >= g.offset + window)
    };
    let mut found = 0;
    let mut attempts = 0;
    while found < wanted && attempts < 100 * wanted {
        attempts += 1;
        let c = rng.gen_range(lo..=hi);
        if far_from_gt(c) {
            out.push((c, -1));
            found += 1;
        }
    }
    out
}
