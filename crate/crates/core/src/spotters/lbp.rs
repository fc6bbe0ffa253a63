//! Uniform local binary patterns (8 neighbours, radius 1).

use std::sync::OnceLock;

use image::GrayImage;

use crate::error::{Error, Result};

/// 58 uniform patterns plus one bin shared by all non-uniform ones.
pub const UNIFORM_BINS: usize = 59;

/// Pattern bits from the neighbours of a pixel, listed clockwise from the
/// top:
///
/// ```text
/// 7  0  1
/// 6  p  2
/// 5  4  3
/// ```
///
/// Bit `n` is set when neighbour `n` is at least as bright as the center.
pub fn lbp_code(center: u8, neighbors: [u8; 8]) -> u8 {
    neighbors
        .iter()
        .enumerate()
        .fold(0u8, |acc, (n, &v)| if v >= center { acc | (1 << n) } else { acc })
}

/// Number of 0/1 changes around the circular bit string.
pub fn transitions(code: u8) -> u32 {
    (code ^ code.rotate_right(1)).count_ones()
}

fn uniform_table() -> &'static [u8; 256] {
    static TABLE: OnceLock<[u8; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [(UNIFORM_BINS - 1) as u8; 256];
        let mut next = 0u8;
        for code in 0..=255u8 {
            if transitions(code) <= 2 {
                table[code as usize] = next;
                next += 1;
            }
        }
        debug_assert_eq!(next as usize, UNIFORM_BINS - 1);
        table
    })
}

/// Histogram bin of a pattern: uniform patterns in ascending code order,
/// then the shared non-uniform bin.
pub fn uniform_bin(code: u8) -> usize {
    uniform_table()[code as usize] as usize
}

/// Uniform bin of the pixel at `(x, y)`, replicating edge pixels for
/// neighbours that fall outside the frame.
pub fn pixel_bin(frame: &GrayImage, x: u32, y: u32) -> usize {
    let (w, h) = frame.dimensions();
    let raw = frame.as_raw();
    let at = |dx: i64, dy: i64| -> u8 {
        let xx = (x as i64 + dx).clamp(0, w as i64 - 1) as usize;
        let yy = (y as i64 + dy).clamp(0, h as i64 - 1) as usize;
        raw[yy * w as usize + xx]
    };
    let neighbors = [
        at(0, -1),
        at(1, -1),
        at(1, 0),
        at(1, 1),
        at(0, 1),
        at(-1, 1),
        at(-1, 0),
        at(-1, -1),
    ];
    uniform_bin(lbp_code(at(0, 0), neighbors))
}

/// Block index along one axis; trailing pixels belong to the last block.
pub(crate) fn block_of(pos: usize, extent: usize, blocks: usize) -> usize {
    (pos / (extent / blocks)).min(blocks - 1)
}

/// Per-block uniform LBP histograms over a `grid` x `grid` division of the
/// frame, row-major over blocks and each L1-normalized. The result is flat:
/// block `b` occupies `b * UNIFORM_BINS .. (b + 1) * UNIFORM_BINS`.
pub fn lbp_block_histograms(frame: &GrayImage, grid: usize) -> Result<Vec<f64>> {
    let (w, h) = frame.dimensions();
    if grid == 0 || (w as usize) < grid || (h as usize) < grid {
        return Err(Error::Argument(format!(
            "{w}x{h} frame cannot be divided into a {grid}x{grid} grid"
        )));
    }
    let mut hist = vec![0.0; grid * grid * UNIFORM_BINS];
    let mut mass = vec![0usize; grid * grid];
    for y in 0..h {
        let by = block_of(y as usize, h as usize, grid);
        for x in 0..w {
            let bx = block_of(x as usize, w as usize, grid);
            let block = by * grid + bx;
            hist[block * UNIFORM_BINS + pixel_bin(frame, x, y)] += 1.0;
            mass[block] += 1;
        }
    }
    for (block, chunk) in hist.chunks_exact_mut(UNIFORM_BINS).enumerate() {
        let total = mass[block] as f64;
        chunk.iter_mut().for_each(|v| *v /= total);
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Luma;

    #[test]
    fn fifty_eight_uniform_patterns() {
        let uniform = (0..=255u8).filter(|&c| transitions(c) <= 2).count();
        assert_eq!(uniform, 58);
        assert_eq!(uniform_bin(0), 0);
        assert_eq!(uniform_bin(255), 57);
        assert_eq!(uniform_bin(0b0101_0101), 58);
    }

    #[test]
    fn constant_frame_single_bin() {
        let frame = GrayImage::from_pixel(30, 24, Luma([77]));
        let hist = lbp_block_histograms(&frame, 6).unwrap();
        for block in hist.chunks_exact(UNIFORM_BINS) {
            assert_eq!(block.iter().sum::<f64>(), 1.0);
            assert_eq!(block[uniform_bin(255)], 1.0);
        }
    }

    #[test]
    fn trailing_pixels_join_last_block() {
        assert_eq!(block_of(13, 14, 3), 2);
        assert_eq!(block_of(11, 14, 3), 2);
        assert_eq!(block_of(3, 14, 3), 0);
        let frame = GrayImage::from_fn(14, 14, |x, y| Luma([((x * 31 + y * 17) % 256) as u8]));
        let hist = lbp_block_histograms(&frame, 3).unwrap();
        for block in hist.chunks_exact(UNIFORM_BINS) {
            assert!((block.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn frame_smaller_than_grid() {
        let frame = GrayImage::new(5, 10);
        assert!(matches!(lbp_block_histograms(&frame, 6), Err(Error::Argument(_))));
    }
}
