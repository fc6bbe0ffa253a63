//! Landmark distance-ratio spotter.

use super::{peaks_to_detections, ScoreCurve, SpotterConfig};
use crate::error::{Error, Result};
use crate::model::{face68, Detection, LandmarkTrack, Point};

pub const LANDMARK_RATIOS: usize = 6;

/// Brow-to-eye heights (right, left), eye apertures (right, left), mouth
/// width and mouth height, from a 68-point face.
pub fn landmark_ratios(points: &[Point]) -> Result<[f64; LANDMARK_RATIOS]> {
    if points.len() < face68::POINTS {
        return Err(Error::Argument(format!(
            "landmark ratios need {} points, got {}",
            face68::POINTS,
            points.len()
        )));
    }
    let mid = |ids: [usize; 2]| Point::mean(&[points[ids[0]], points[ids[1]]]);
    let right_eye_top = mid(face68::RIGHT_EYE_TOP);
    let left_eye_top = mid(face68::LEFT_EYE_TOP);
    Ok([
        points[face68::RIGHT_BROW_MID].dist(&right_eye_top),
        points[face68::LEFT_BROW_MID].dist(&left_eye_top),
        right_eye_top.dist(&mid(face68::RIGHT_EYE_BOTTOM)),
        left_eye_top.dist(&mid(face68::LEFT_EYE_BOTTOM)),
        points[face68::MOUTH_RIGHT_CORNER].dist(&points[face68::MOUTH_LEFT_CORNER]),
        points[face68::MOUTH_TOP].dist(&points[face68::MOUTH_BOTTOM]),
    ])
}

/// Score at frame `i`: L2 deviation from 1 of the distance ratios of frame
/// `i` over those of the reference frame `i - ⌊W/2⌋`, the first frame of the
/// scanning window centered on `i`. The first and last `⌊W/2⌋` frames score 0.
pub fn landmark_curve(track: &LandmarkTrack, frame_count: usize, cfg: &SpotterConfig) -> Result<ScoreCurve> {
    cfg.validate()?;
    track.check_dense(frame_count)?;
    let features: Vec<[f64; LANDMARK_RATIOS]> = (0..frame_count)
        .map(|i| landmark_ratios(track.points(i).expect("dense track")))
        .collect::<Result<_>>()?;

    let half = cfg.landmark_window / 2;
    let mut values = vec![0.0; frame_count];
    if frame_count > 2 * half {
        for (i, value) in values.iter_mut().enumerate().take(frame_count - half).skip(half) {
            let reference = &features[i - half];
            let dev: f64 = features[i]
                .iter()
                .zip(reference)
                .filter(|(_, &r)| r > 1e-9)
                .map(|(&x, &r)| (x / r - 1.0).powi(2))
                .sum();
            *value = dev.sqrt();
        }
    }
    Ok(ScoreCurve {
        video_id: track.video_id.clone(),
        values,
    })
}

pub fn spot_landmarks(track: &LandmarkTrack, frame_count: usize, cfg: &SpotterConfig) -> Result<Vec<Detection>> {
    let curve = landmark_curve(track, frame_count, cfg)?;
    Ok(peaks_to_detections(&curve, cfg))
}
