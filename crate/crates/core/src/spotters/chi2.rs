//! LBP chi-square contrast: how far the center frame of a sliding window
//! departs from the mean of its head and tail frames.

use rayon::prelude::*;

use super::{lbp_block_histograms, peaks_to_detections, ScoreCurve, SpotterConfig};
use crate::error::{Error, Result};
use crate::model::{Detection, FrameSequence};

/// `sum (a_i - b_i)^2 / (a_i + b_i)`, skipping bins where both are zero.
pub fn chi2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let s = x + y;
            if s == 0.0 {
                0.0
            } else {
                (x - y) * (x - y) / s
            }
        })
        .sum()
}

/// Score at frame `i` is the block-summed chi-square distance between the
/// LBP histograms of frame `i` and the average histograms of the window's
/// head `i - ⌊L/2⌋` and tail `i - ⌊L/2⌋ + L - 1`. Frames whose window does
/// not fit score 0.
pub fn chi2_contrast_curve(seq: &FrameSequence, cfg: &SpotterConfig) -> Result<ScoreCurve> {
    cfg.validate()?;
    let n = seq.len();
    let l = cfg.window;
    if n <= l {
        return Err(Error::SequenceTooShort {
            frames: n,
            required: l + 1,
        });
    }
    let hists: Vec<Vec<f64>> = seq
        .frames
        .par_iter()
        .map(|f| lbp_block_histograms(f, cfg.lbp_grid))
        .collect::<Result<_>>()?;

    let half = l / 2;
    let mut values = vec![0.0; n];
    for (i, value) in values.iter_mut().enumerate().take(n - (l - 1 - half)).skip(half) {
        let head = &hists[i - half];
        let tail = &hists[i - half + l - 1];
        let reference: Vec<f64> = head.iter().zip(tail).map(|(h, t)| 0.5 * (h + t)).collect();
        *value = chi2_distance(&hists[i], &reference);
    }
    Ok(ScoreCurve {
        video_id: seq.video_id.clone(),
        values,
    })
}

pub fn spot_lbp_chi2(seq: &FrameSequence, cfg: &SpotterConfig) -> Result<Vec<Detection>> {
    let curve = chi2_contrast_curve(seq, cfg)?;
    Ok(peaks_to_detections(&curve, cfg))
}
