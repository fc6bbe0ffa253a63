//! Per-frame facial landmark tracks.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn mean(points: &[Point]) -> Point {
        let n = points.len() as f64;
        let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Point::new(sx / n, sy / n)
    }
}

/// Index layout of the common 68-point face annotation scheme.
pub mod face68 {
    use std::ops::Range;

    pub const POINTS: usize = 68;
    pub const RIGHT_BROW: Range<usize> = 17..22;
    pub const LEFT_BROW: Range<usize> = 22..27;
    pub const NOSE_BASE: usize = 33;
    pub const RIGHT_EYE: Range<usize> = 36..42;
    pub const LEFT_EYE: Range<usize> = 42..48;
    pub const MOUTH_RIGHT_CORNER: usize = 48;
    pub const MOUTH_TOP: usize = 51;
    pub const MOUTH_LEFT_CORNER: usize = 54;
    pub const MOUTH_BOTTOM: usize = 57;
    pub const RIGHT_BROW_MID: usize = 19;
    pub const LEFT_BROW_MID: usize = 24;
    pub const RIGHT_EYE_TOP: [usize; 2] = [37, 38];
    pub const RIGHT_EYE_BOTTOM: [usize; 2] = [40, 41];
    pub const LEFT_EYE_TOP: [usize; 2] = [43, 44];
    pub const LEFT_EYE_BOTTOM: [usize; 2] = [46, 47];
}

/// Landmarks of one video, keyed by frame index. A track may be dense (every
/// frame) or sparse; consumers check the coverage they need.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LandmarkTrack {
    pub video_id: String,
    pub frames: BTreeMap<usize, Vec<Point>>,
}

impl LandmarkTrack {
    pub fn new(video_id: impl Into<String>) -> Self {
        LandmarkTrack {
            video_id: video_id.into(),
            frames: BTreeMap::new(),
        }
    }

    pub fn points(&self, frame: usize) -> Option<&[Point]> {
        self.frames.get(&frame).map(Vec::as_slice)
    }

    /// Right eye center, left eye center and nose base. Tracks with exactly
    /// three points per frame are taken to already hold these.
    pub fn registration_points(&self, frame: usize) -> Option<[Point; 3]> {
        let pts = self.points(frame)?;
        match pts.len() {
            3 => Some([pts[0], pts[1], pts[2]]),
            n if n >= face68::POINTS => Some([
                Point::mean(&pts[face68::RIGHT_EYE]),
                Point::mean(&pts[face68::LEFT_EYE]),
                pts[face68::NOSE_BASE],
            ]),
            _ => None,
        }
    }

    /// Checks every frame in `0..frame_count` is present.
    pub fn check_dense(&self, frame_count: usize) -> Result<()> {
        for i in 0..frame_count {
            if !self.frames.contains_key(&i) {
                return Err(Error::Coverage(format!(
                    "{}: no landmarks for frame {i}",
                    self.video_id
                )));
            }
        }
        Ok(())
    }
}

/// Reads `video_id,frame,point_index,x,y` rows into per-video tracks.
pub fn read_landmarks(path: &Path) -> Result<BTreeMap<String, LandmarkTrack>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut tracks: BTreeMap<String, LandmarkTrack> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(path, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != 5 {
            return Err(Error::parse(path, line, "expected video_id,frame,point_index,x,y"));
        }
        let num = |i: usize, name: &str| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .map_err(|e| Error::parse(path, line, format!("{name}: {e}")))
        };
        let frame: usize = record[1]
            .parse()
            .map_err(|e| Error::parse(path, line, format!("frame: {e}")))?;
        let index: usize = record[2]
            .parse()
            .map_err(|e| Error::parse(path, line, format!("point_index: {e}")))?;
        let p = Point::new(num(3, "x")?, num(4, "y")?);
        let track = tracks
            .entry(record[0].to_string())
            .or_insert_with(|| LandmarkTrack::new(&record[0]));
        let pts = track.frames.entry(frame).or_default();
        if index != pts.len() {
            return Err(Error::parse(
                path,
                line,
                format!("point_index {index} out of order (expected {})", pts.len()),
            ));
        }
        pts.push(p);
    }
    Ok(tracks)
}

pub fn write_landmarks<'a>(path: &Path, tracks: impl IntoIterator<Item = &'a LandmarkTrack>) -> Result<()> {
    let mut out = String::from("video_id,frame,point_index,x,y\n");
    for t in tracks {
        for (frame, pts) in &t.frames {
            for (i, p) in pts.iter().enumerate() {
                let _ = writeln!(out, "{},{},{},{},{}", t.video_id, frame, i, p.x, p.y);
            }
        }
    }
    write_atomic(path, out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let mut t = LandmarkTrack::new("v1");
        t.frames.insert(
            0,
            vec![Point::new(1.5, 2.0), Point::new(3.0, 4.25), Point::new(5.0, 9.0)],
        );
        t.frames.insert(
            1,
            vec![Point::new(1.0, 2.0), Point::new(3.0, 4.0), Point::new(5.0, 9.5)],
        );
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("lm.csv");
        write_landmarks(&p, [&t]).unwrap();
        let back = read_landmarks(&p).unwrap();
        assert_eq!(back["v1"], t);
        assert_eq!(back["v1"].registration_points(1).unwrap()[2], Point::new(5.0, 9.5));
        assert!(t.check_dense(2).is_ok());
        assert!(matches!(t.check_dense(3), Err(Error::Coverage(_))));
    }
}
