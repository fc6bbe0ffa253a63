//! Three-point similarity registration of face frames onto a fixed template.

use image::{GrayImage, Luma};

use super::{FrameSequence, LandmarkTrack, Point};
use crate::error::{Error, Result};

pub const DEFAULT_REFRESH_EVERY: usize = 30;

/// Target geometry of an aligned face crop.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentTemplate {
    /// Right eye, left eye, nose base, in output pixel coordinates.
    pub points: [Point; 3],
    pub width: u32,
    pub height: u32,
}

impl Default for AlignmentTemplate {
    fn default() -> Self {
        AlignmentTemplate {
            points: [Point::new(42.0, 51.0), Point::new(86.0, 51.0), Point::new(64.0, 100.0)],
            width: 128,
            height: 128,
        }
    }
}

fn check_non_collinear(points: &[Point; 3], what: &str) -> Result<()> {
    let [a, b, c] = points;
    let cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    let scale = a.dist(b).max(a.dist(c)).max(b.dist(c)).max(1.0);
    if cross.abs() <= 1e-9 * scale * scale {
        return Err(Error::Geometry(format!("{what} points are collinear")));
    }
    Ok(())
}

impl AlignmentTemplate {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Argument("template size must be positive".into()));
        }
        check_non_collinear(&self.points, "template")
    }
}

/// `p -> (a*x - b*y + tx, b*x + a*y + ty)`: rotation, uniform scale and shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub a: f64,
    pub b: f64,
    pub tx: f64,
    pub ty: f64,
}

impl Similarity {
    pub const IDENTITY: Similarity = Similarity {
        a: 1.0,
        b: 0.0,
        tx: 0.0,
        ty: 0.0,
    };

    /// Least-squares similarity taking `src[i]` onto `dst[i]`.
    pub fn fit(src: &[Point; 3], dst: &[Point; 3]) -> Result<Self> {
        check_non_collinear(src, "landmark")?;
        check_non_collinear(dst, "template")?;
        let sc = Point::mean(src);
        let dc = Point::mean(dst);
        let (mut num_a, mut num_b, mut den) = (0.0, 0.0, 0.0);
        for (s, d) in src.iter().zip(dst) {
            let (sx, sy) = (s.x - sc.x, s.y - sc.y);
            let (dx, dy) = (d.x - dc.x, d.y - dc.y);
            num_a += sx * dx + sy * dy;
            num_b += sx * dy - sy * dx;
            den += sx * sx + sy * sy;
        }
        let a = num_a / den;
        let b = num_b / den;
        Ok(Similarity {
            a,
            b,
            tx: dc.x - (a * sc.x - b * sc.y),
            ty: dc.y - (b * sc.x + a * sc.y),
        })
    }

    pub fn apply(&self, p: Point) -> Point {
        Point::new(
            self.a * p.x - self.b * p.y + self.tx,
            self.b * p.x + self.a * p.y + self.ty,
        )
    }

    pub fn inverse_apply(&self, p: Point) -> Point {
        let s2 = self.a * self.a + self.b * self.b;
        let (u, v) = (p.x - self.tx, p.y - self.ty);
        Point::new((self.a * u + self.b * v) / s2, (-self.b * u + self.a * v) / s2)
    }
}

/// Bilinear sample; pixels outside the frame read as 0.
fn sample(frame: &GrayImage, p: Point) -> u8 {
    let (w, h) = frame.dimensions();
    let x0 = p.x.floor();
    let y0 = p.y.floor();
    let fx = p.x - x0;
    let fy = p.y - y0;
    let at = |x: f64, y: f64| -> f64 {
        if x < 0.0 || y < 0.0 || x >= w as f64 || y >= h as f64 {
            0.0
        } else {
            frame.get_pixel(x as u32, y as u32)[0] as f64
        }
    };
    let top = at(x0, y0) * (1.0 - fx) + at(x0 + 1.0, y0) * fx;
    let bottom = at(x0, y0 + 1.0) * (1.0 - fx) + at(x0 + 1.0, y0 + 1.0) * fx;
    (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8
}

fn warp(frame: &GrayImage, transform: &Similarity, template: &AlignmentTemplate) -> GrayImage {
    GrayImage::from_fn(template.width, template.height, |u, v| {
        Luma([sample(frame, transform.inverse_apply(Point::new(u as f64, v as f64)))])
    })
}

/// Registers every frame onto `template`. Frame `i` uses the transform fitted
/// on frame `(i / refresh_every) * refresh_every`, whose landmarks must exist.
pub fn align_frames(
    seq: &FrameSequence,
    landmarks: &LandmarkTrack,
    template: &AlignmentTemplate,
    refresh_every: usize,
) -> Result<FrameSequence> {
    template.validate()?;
    if refresh_every == 0 {
        return Err(Error::Argument("refresh interval must be at least 1 frame".into()));
    }
    let mut out = Vec::with_capacity(seq.len());
    let mut current: Option<(usize, Similarity)> = None;
    for (i, frame) in seq.frames.iter().enumerate() {
        let governing = (i / refresh_every) * refresh_every;
        let transform = match current {
            Some((g, t)) if g == governing => t,
            _ => {
                let pts = landmarks.registration_points(governing).ok_or_else(|| {
                    Error::Coverage(format!(
                        "{}: no registration landmarks at frame {governing}",
                        seq.video_id
                    ))
                })?;
                let t = Similarity::fit(&pts, &template.points)?;
                current = Some((governing, t));
                t
            }
        };
        out.push(warp(frame, &transform, template));
    }
    FrameSequence::new(seq.video_id.clone(), seq.fps, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(w: u32, h: u32) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| Luma([((x * 7 + y * 13 + (x * y) % 11) % 256) as u8]))
    }

    fn track(frames: usize, pts: [Point; 3]) -> LandmarkTrack {
        let mut t = LandmarkTrack::new("v");
        for i in 0..frames {
            t.frames.insert(i, pts.to_vec());
        }
        t
    }

    #[test]
    fn fit_recovers_a_known_similarity() {
        let truth = Similarity {
            a: 0.8,
            b: 0.3,
            tx: 5.0,
            ty: -2.0,
        };
        let src = [Point::new(10.0, 10.0), Point::new(50.0, 12.0), Point::new(30.0, 60.0)];
        let dst = src.map(|p| truth.apply(p));
        let fit = Similarity::fit(&src, &dst).unwrap();
        for (got, want) in [(fit.a, 0.8), (fit.b, 0.3), (fit.tx, 5.0), (fit.ty, -2.0)] {
            assert!((got - want).abs() < 1e-9);
        }
        let back = fit.inverse_apply(fit.apply(Point::new(3.0, 4.0)));
        assert!((back.x - 3.0).abs() < 1e-9 && (back.y - 4.0).abs() < 1e-9);
    }

    #[test]
    fn identity_landmarks_give_plain_crop() {
        let tpl = AlignmentTemplate::default();
        let img = textured(160, 150);
        let seq = FrameSequence::new("v", 100.0, vec![img.clone(); 3]).unwrap();
        let out = align_frames(&seq, &track(3, tpl.points), &tpl, DEFAULT_REFRESH_EVERY).unwrap();
        assert_eq!(out.width, 128);
        assert_eq!(out.height, 128);
        for f in &out.frames {
            for (x, y, p) in f.enumerate_pixels() {
                assert_eq!(p[0], img.get_pixel(x, y)[0]);
            }
        }
    }

    #[test]
    fn translated_landmarks_shift_the_crop() {
        let tpl = AlignmentTemplate::default();
        let img = textured(200, 160);
        let seq = FrameSequence::new("v", 100.0, vec![img.clone()]).unwrap();
        let shifted = tpl.points.map(|p| Point::new(p.x + 10.0, p.y));
        let out = align_frames(&seq, &track(1, shifted), &tpl, 30).unwrap();
        for (x, y, p) in out.frames[0].enumerate_pixels() {
            assert_eq!(p[0], img.get_pixel(x + 10, y)[0]);
        }
    }

    #[test]
    fn collinear_and_missing_landmarks() {
        let tpl = AlignmentTemplate::default();
        let seq = FrameSequence::new("v", 100.0, vec![textured(140, 140); 40]).unwrap();
        let line = [Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(2.0, 2.0)];
        assert!(matches!(
            align_frames(&seq, &track(40, line), &tpl, 30),
            Err(Error::Geometry(_))
        ));

        // landmarks only on frame 0 cover frames 0..30 but not frame 30.
        let sparse = track(1, tpl.points);
        assert!(matches!(align_frames(&seq, &sparse, &tpl, 30), Err(Error::Coverage(_))));
        let mut enough = track(1, tpl.points);
        enough.frames.insert(30, tpl.points.to_vec());
        assert_eq!(align_frames(&seq, &enough, &tpl, 30).unwrap().len(), 40);
    }

    #[test]
    fn transform_refreshes_every_m_frames() {
        let tpl = AlignmentTemplate::default();
        let img = textured(200, 160);
        let seq = FrameSequence::new("v", 100.0, vec![img.clone(); 4]).unwrap();
        let mut t = LandmarkTrack::new("v");
        t.frames.insert(0, tpl.points.to_vec());
        t.frames
            .insert(1, tpl.points.map(|p| Point::new(p.x + 5.0, p.y)).to_vec());
        t.frames
            .insert(2, tpl.points.map(|p| Point::new(p.x + 5.0, p.y)).to_vec());
        t.frames
            .insert(3, tpl.points.map(|p| Point::new(p.x + 5.0, p.y)).to_vec());
        let out = align_frames(&seq, &t, &tpl, 2).unwrap();
        assert_eq!(out.frames[0], out.frames[1]);
        assert_ne!(out.frames[1], out.frames[2]);
        assert_eq!(out.frames[2].get_pixel(0, 0)[0], img.get_pixel(5, 0)[0]);
    }
}
