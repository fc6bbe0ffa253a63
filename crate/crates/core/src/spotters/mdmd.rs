//! Main directional maximal difference, with block matching standing in for
//! a dense optical-flow solver.

use std::f64::consts::TAU;

use image::GrayImage;
use rayon::prelude::*;

use super::lbp::block_of;
use super::{peaks_to_detections, ScoreCurve, SpotterConfig};
use crate::error::{Error, Result};
use crate::model::{Detection, FrameSequence};

fn block_bounds(extent: usize, blocks: usize, b: usize) -> (usize, usize) {
    let size = extent / blocks;
    let start = b * size;
    let end = if b + 1 == blocks { extent } else { start + size };
    (start, end)
}

/// Displacement of every block of `from` in `to`, found by exhaustive
/// sum-of-absolute-differences search within `radius` pixels. Ties go to the
/// shorter displacement, so textureless blocks report `(0, 0)`. Blocks are
/// row-major over a `grid` x `grid` division.
pub fn block_flow(from: &GrayImage, to: &GrayImage, grid: usize, radius: usize) -> Vec<(i32, i32)> {
    let (w, h) = from.dimensions();
    let (w, h) = (w as usize, h as usize);
    let a = from.as_raw();
    let b = to.as_raw();
    let r = radius as i64;
    debug_assert_eq!(block_of(w - 1, w, grid), grid - 1);

    let mut flow = Vec::with_capacity(grid * grid);
    for by in 0..grid {
        let (y0, y1) = block_bounds(h, grid, by);
        for bx in 0..grid {
            let (x0, x1) = block_bounds(w, grid, bx);
            let mut best = (u64::MAX, i64::MAX, 0i64, 0i64);
            for dy in -r..=r {
                for dx in -r..=r {
                    let mut sad = 0u64;
                    for y in y0..y1 {
                        let yy = (y as i64 + dy).clamp(0, h as i64 - 1) as usize;
                        let row_a = &a[y * w..(y + 1) * w];
                        let row_b = &b[yy * w..(yy + 1) * w];
                        for (x, &pa) in row_a.iter().enumerate().take(x1).skip(x0) {
                            let xx = (x as i64 + dx).clamp(0, w as i64 - 1) as usize;
                            sad += pa.abs_diff(row_b[xx]) as u64;
                        }
                    }
                    let cand = (sad, dx * dx + dy * dy, dy, dx);
                    if cand < best {
                        best = cand;
                    }
                }
            }
            flow.push((best.3 as i32, best.2 as i32));
        }
    }
    flow
}

/// Direction bin of a non-zero vector; bin 0 is centered on `+x`.
pub fn direction_bin(dx: f64, dy: f64, bins: usize) -> usize {
    let angle = dy.atan2(dx).rem_euclid(TAU);
    let width = TAU / bins as f64;
    ((angle / width).round() as usize) % bins
}

/// Mean magnitude of the largest third of the vectors that fall in the most
/// populated direction bin (lowest bin on ties). Zero vectors carry no
/// direction and are ignored; a field without motion scores 0.
pub fn main_direction_feature(flow: &[(i32, i32)], bins: usize) -> f64 {
    let mut counts = vec![0usize; bins];
    let moving: Vec<(usize, f64)> = flow
        .iter()
        .filter(|&&(dx, dy)| dx != 0 || dy != 0)
        .map(|&(dx, dy)| {
            let bin = direction_bin(dx as f64, dy as f64, bins);
            counts[bin] += 1;
            (bin, (dx as f64).hypot(dy as f64))
        })
        .collect();
    if moving.is_empty() {
        return 0.0;
    }
    let main = (0..bins)
        .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
        .unwrap();
    let mut mags: Vec<f64> = moving.into_iter().filter(|(b, _)| *b == main).map(|(_, m)| m).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let take = mags.len().div_ceil(3);
    mags[..take].iter().sum::<f64>() / take as f64
}

/// Score at frame `i`: main-direction feature of the motion from `i - k` to
/// `i`, minus the same feature from `i - k` to `i + k`, clamped at 0. A
/// transient that returns to neutral within `2k` frames scores high; slow
/// sustained motion cancels out. Margins (`i < k`, `i + k >= n`) score 0.
pub fn mdmd_curve(seq: &FrameSequence, cfg: &SpotterConfig) -> Result<ScoreCurve> {
    cfg.validate()?;
    let n = seq.len();
    let k = cfg.mdmd_k;
    if n <= 2 * k {
        return Err(Error::SequenceTooShort {
            frames: n,
            required: 2 * k + 1,
        });
    }
    if (seq.width as usize) < cfg.lbp_grid || (seq.height as usize) < cfg.lbp_grid {
        return Err(Error::Argument(format!(
            "{}x{} frames cannot be divided into a {g}x{g} grid",
            seq.width,
            seq.height,
            g = cfg.lbp_grid
        )));
    }
    let grid = cfg.lbp_grid;
    let radius = cfg.mdmd_search_radius;
    let bins = cfg.mdmd_bins;
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            if i < k || i + k >= n {
                return 0.0;
            }
            let head = &seq.frames[i - k];
            let current = main_direction_feature(&block_flow(head, &seq.frames[i], grid, radius), bins);
            let baseline = main_direction_feature(&block_flow(head, &seq.frames[i + k], grid, radius), bins);
            (current - baseline).max(0.0)
        })
        .collect();
    Ok(ScoreCurve {
        video_id: seq.video_id.clone(),
        values,
    })
}

pub fn spot_mdmd(seq: &FrameSequence, cfg: &SpotterConfig) -> Result<Vec<Detection>> {
    let curve = mdmd_curve(seq, cfg)?;
    Ok(peaks_to_detections(&curve, cfg))
}
