//! Histograms over the three orthogonal planes (XY, XT, YT) of a video
//! volume, per overlapping spatio-temporal block.

use std::f64::consts::PI;

use image::GrayImage;

use super::{FeatureKind, StFeatureConfig};
use crate::error::{Error, Result};
use crate::spotters::lbp::{lbp_code, uniform_bin, UNIFORM_BINS};

pub const PLANES: usize = 3;

/// Half-open ranges of `blocks` equal blocks along an axis of `extent`
/// samples, adjacent blocks sharing `overlap` of their extent.
pub fn block_ranges(extent: usize, blocks: usize, overlap: f64) -> Result<Vec<(usize, usize)>> {
    if blocks == 0 || extent < blocks {
        return Err(Error::Argument(format!(
            "an axis of {extent} samples cannot hold {blocks} blocks"
        )));
    }
    let size = extent as f64 / (blocks as f64 - (blocks as f64 - 1.0) * overlap);
    let stride = size * (1.0 - overlap);
    Ok((0..blocks)
        .map(|j| {
            let start = ((j as f64 * stride).floor() as usize).min(extent - 1);
            let end = if j + 1 == blocks {
                extent
            } else {
                ((j as f64 * stride + size).round() as usize).clamp(start + 1, extent)
            };
            (start, end)
        })
        .collect())
}

/// Dense view of a volume with edge-replicating access.
struct Volume<'a> {
    frames: &'a [&'a GrayImage],
    w: usize,
    h: usize,
    t: usize,
}

impl Volume<'_> {
    #[inline]
    fn at(&self, x: i64, y: i64, t: i64) -> u8 {
        let x = x.clamp(0, self.w as i64 - 1) as usize;
        let y = y.clamp(0, self.h as i64 - 1) as usize;
        let t = t.clamp(0, self.t as i64 - 1) as usize;
        self.frames[t].as_raw()[y * self.w + x]
    }
}

/// Neighbour offsets `(horizontal, vertical)` in the LBP bit order.
const RING: [(i64, i64); 8] = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];

/// Per-voxel histogram bin (or `None` for no contribution) and weight, for
/// one plane.
fn voxel_bins(vol: &Volume<'_>, plane: usize, kind: FeatureKind, bins: usize) -> Vec<Option<(u16, f64)>> {
    let mut out = Vec::with_capacity(vol.w * vol.h * vol.t);
    for t in 0..vol.t as i64 {
        for y in 0..vol.h as i64 {
            for x in 0..vol.w as i64 {
                // (horizontal, vertical) axes of the plane
                let offset = |u: i64, v: i64| -> (i64, i64, i64) {
                    match plane {
                        0 => (x + u, y + v, t),
                        1 => (x + u, y, t + v),
                        _ => (x, y + u, t + v),
                    }
                };
                let sample = |u: i64, v: i64| {
                    let (a, b, c) = offset(u, v);
                    vol.at(a, b, c)
                };
                let entry = match kind {
                    FeatureKind::LbpTop => {
                        let neighbors = RING.map(|(u, v)| sample(u, v));
                        Some((uniform_bin(lbp_code(sample(0, 0), neighbors)) as u16, 1.0))
                    }
                    FeatureKind::HogTop | FeatureKind::HigoTop => {
                        let gu = sample(1, 0) as f64 - sample(-1, 0) as f64;
                        let gv = sample(0, 1) as f64 - sample(0, -1) as f64;
                        if gu == 0.0 && gv == 0.0 {
                            None
                        } else {
                            let angle = gv.atan2(gu).rem_euclid(PI);
                            let bin = ((angle / (PI / bins as f64)) as usize).min(bins - 1);
                            let weight = if kind == FeatureKind::HogTop { gu.hypot(gv) } else { 1.0 };
                            Some((bin as u16, weight))
                        }
                    }
                };
                out.push(entry);
            }
        }
    }
    out
}

/// Feature vector of a volume: for every block (temporal block outermost,
/// then rows, then columns) and every plane (XY, XT, YT), an L1-normalized
/// histogram. LBP-TOP uses the 59 uniform patterns; HOG-TOP and HIGO-TOP use
/// `bins` unsigned orientations, magnitude-weighted and unit-weighted
/// respectively. Zero-gradient voxels add to no bin, so a flat block has an
/// all-zero gradient histogram.
pub fn extract_st_feature(volume: &[&GrayImage], cfg: &StFeatureConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let (bx, by, bt) = cfg.blocks;
    if volume.len() < bt {
        return Err(Error::Argument(format!(
            "volume of {} frames is shorter than {bt} temporal blocks",
            volume.len()
        )));
    }
    let (w, h) = volume[0].dimensions();
    if volume.iter().any(|f| f.dimensions() != (w, h)) {
        return Err(Error::Argument("volume frames differ in size".into()));
    }
    let xr = block_ranges(w as usize, bx, cfg.overlap)?;
    let yr = block_ranges(h as usize, by, cfg.overlap)?;
    let tr = block_ranges(volume.len(), bt, cfg.overlap)?;
    let vol = Volume {
        frames: volume,
        w: w as usize,
        h: h as usize,
        t: volume.len(),
    };
    let nbins = cfg.histogram_bins();
    let planes: Vec<Vec<Option<(u16, f64)>>> = (0..PLANES).map(|p| voxel_bins(&vol, p, cfg.kind, cfg.bins)).collect();

    let mut feature = Vec::with_capacity(cfg.feature_len());
    let mut hist = vec![0.0; nbins];
    for &(t0, t1) in &tr {
        for &(y0, y1) in &yr {
            for &(x0, x1) in &xr {
                for plane in &planes {
                    hist.iter_mut().for_each(|v| *v = 0.0);
                    for t in t0..t1 {
                        for y in y0..y1 {
                            let row = (t * vol.h + y) * vol.w;
                            for (bin, weight) in plane[row + x0..row + x1].iter().flatten() {
                                hist[*bin as usize] += weight;
                            }
                        }
                    }
                    let total: f64 = hist.iter().sum();
                    if total > 0.0 {
                        feature.extend(hist.iter().map(|v| v / total));
                    } else {
                        feature.extend_from_slice(&hist);
                    }
                }
            }
        }
    }
    debug_assert_eq!(feature.len(), cfg.feature_len());
    debug_assert!(nbins == UNIFORM_BINS || cfg.kind != FeatureKind::LbpTop);
    Ok(feature)
}
