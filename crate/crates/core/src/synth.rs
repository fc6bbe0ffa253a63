//! Seeded synthetic fixtures: face-like rasters with injected
//! micro-expressions and optional distractor events, plus matching landmark
//! tracks and ground truth.
//!
//! Randomness comes from `ChaCha8Rng` (rand_chacha 0.3) seeded with the
//! fixture seed; video `i` draws from stream `i` of that generator, so every
//! video is independent of how many others are generated or in what order.
//! Ranges are sampled with rand 0.8 `gen_range`.

use std::f64::consts::TAU;
use std::fmt::{self, Write as _};
use std::path::Path;

use image::{GrayImage, Luma};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::model::{
    face68, write_landmarks, write_manifest, write_raw, DatasetManifest, FrameSequence, GroundTruthSample,
    LandmarkTrack, Point, VideoRecord,
};

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureConfig {
    pub seed: u64,
    pub videos: usize,
    /// Videos are assigned to subjects round-robin.
    pub subjects: usize,
    pub frames_per_video: usize,
    pub fps: f64,
    /// Inclusive range of MEs per video.
    pub mes_per_video: (usize, usize),
    /// Inclusive range of ME lengths in frames.
    pub me_length: (usize, usize),
    /// Peak intensity change of an ME blob, in gray levels.
    pub me_amplitude: f64,
    /// Expected events per video; the fractional part is a Bernoulli draw.
    pub blink_rate: f64,
    pub head_shift_rate: f64,
    pub macro_rate: f64,
    /// Minimum gap in frames between any two injected events and the video ends.
    pub min_separation: usize,
    pub width: u32,
    pub height: u32,
    /// Amplitude of independent per-frame uniform pixel noise.
    pub noise: u8,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        FixtureConfig {
            seed: 2024,
            videos: 4,
            subjects: 2,
            frames_per_video: 2200,
            fps: 100.0,
            mes_per_video: (1, 3),
            me_length: (10, 51),
            me_amplitude: 45.0,
            blink_rate: 0.0,
            head_shift_rate: 0.0,
            macro_rate: 0.0,
            min_separation: 35,
            width: 128,
            height: 128,
            noise: 0,
        }
    }
}

impl FixtureConfig {
    /// No distractors, three MEs per video.
    pub fn clean(seed: u64) -> Self {
        FixtureConfig {
            seed,
            mes_per_video: (3, 3),
            ..Self::default()
        }
    }

    /// The clean profile plus blinks, head shifts and ordinary expressions.
    pub fn with_distractors(seed: u64) -> Self {
        FixtureConfig {
            blink_rate: 3.0,
            head_shift_rate: 1.0,
            macro_rate: 1.0,
            ..Self::clean(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.videos == 0 || self.subjects == 0 || self.subjects > self.videos {
            return bad(format!(
                "need 1 <= subjects ({}) <= videos ({})",
                self.subjects, self.videos
            ));
        }
        if self.frames_per_video < 8 {
            return bad("frames_per_video must be at least 8".into());
        }
        let (lo, hi) = self.me_length;
        if lo < 2 || lo > hi || hi > self.frames_per_video / 4 {
            return bad(format!(
                "me_length [{lo}, {hi}] must satisfy 2 <= min <= max <= frames_per_video / 4"
            ));
        }
        if self.mes_per_video.0 > self.mes_per_video.1 {
            return bad("mes_per_video min exceeds max".into());
        }
        for (name, rate) in [
            ("blink_rate", self.blink_rate),
            ("head_shift_rate", self.head_shift_rate),
            ("macro_rate", self.macro_rate),
        ] {
            if !(rate.is_finite() && rate >= 0.0) {
                return bad(format!("{name} must be finite and >= 0"));
            }
        }
        if !(self.fps.is_finite() && self.fps > 0.0) || !self.me_amplitude.is_finite() {
            return bad("fps and me_amplitude must be finite, fps > 0".into());
        }
        if self.width < 32 || self.height < 32 {
            return bad("frames must be at least 32x32".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeRegion {
    RightBrow,
    LeftBrow,
    BothBrows,
    MouthCorners,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeEvent {
    pub onset: usize,
    pub offset: usize,
    pub region: MeRegion,
    /// Signed peak gray-level change.
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistractorKind {
    Blink,
    HeadShift,
    MacroExpression,
}

impl fmt::Display for DistractorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistractorKind::Blink => "blink",
            DistractorKind::HeadShift => "head_shift",
            DistractorKind::MacroExpression => "macro_expression",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistractorEvent {
    pub video_id: String,
    pub kind: DistractorKind,
    pub onset: usize,
    pub offset: usize,
    /// Horizontal shift in pixels for head shifts, gray levels otherwise.
    pub magnitude: f64,
}

/// Triangular envelope: 0 outside `[onset, offset]`, peaking at the middle.
fn envelope(t: usize, onset: usize, offset: usize) -> f64 {
    if t < onset || t > offset {
        return 0.0;
    }
    let half = (offset - onset + 2) as f64 / 2.0;
    let apex = (onset + offset) as f64 / 2.0;
    (1.0 - (t as f64 - apex).abs() / half).max(0.0)
}

/// Head-shift profile: ramp up over the first quarter, hold, ramp down over
/// the last quarter.
fn plateau(t: usize, onset: usize, offset: usize) -> f64 {
    if t < onset || t > offset {
        return 0.0;
    }
    let len = (offset - onset + 1) as f64;
    let ramp = (len / 4.0).max(1.0);
    let k = (t - onset) as f64 + 0.5;
    (k / ramp).min((len - k) / ramp).clamp(0.0, 1.0)
}

/// Fixed facial geometry in pixels.
#[derive(Debug, Clone, PartialEq)]
struct FaceLayout {
    w: f64,
    h: f64,
}

impl FaceLayout {
    fn p(&self, fx: f64, fy: f64) -> Point {
        Point::new(fx * self.w, fy * self.h)
    }
    fn right_eye(&self) -> Point {
        self.p(0.33, 0.40)
    }
    fn left_eye(&self) -> Point {
        self.p(0.67, 0.40)
    }
    fn eye_radii(&self) -> (f64, f64) {
        (0.08 * self.w, 0.035 * self.h)
    }
    fn right_brow(&self) -> Point {
        self.p(0.33, 0.30)
    }
    fn left_brow(&self) -> Point {
        self.p(0.67, 0.30)
    }
    fn nose(&self) -> Point {
        self.p(0.50, 0.60)
    }
    fn mouth(&self) -> Point {
        self.p(0.50, 0.76)
    }
    fn mouth_radii(&self) -> (f64, f64) {
        (0.15 * self.w, 0.045 * self.h)
    }

    /// Base gray level of the face pattern at `(x, y)`.
    fn shade(&self, x: f64, y: f64) -> f64 {
        let inside = |c: Point, rx: f64, ry: f64| ((x - c.x) / rx).powi(2) + ((y - c.y) / ry).powi(2) <= 1.0;
        let mut v = 70.0 + 20.0 * y / self.h;
        if inside(self.p(0.5, 0.52), 0.40 * self.w, 0.47 * self.h) {
            v = 150.0 + 15.0 * (x / self.w - 0.5);
        }
        let (erx, ery) = self.eye_radii();
        for eye in [self.right_eye(), self.left_eye()] {
            if inside(eye, erx, ery) {
                v = 60.0;
            }
        }
        for brow in [self.right_brow(), self.left_brow()] {
            if inside(brow, 0.10 * self.w, 0.018 * self.h) {
                v = 80.0;
            }
        }
        let nose = self.nose();
        if inside(nose, 0.04 * self.w, 0.02 * self.h) {
            v = 110.0;
        }
        let (mrx, mry) = self.mouth_radii();
        if inside(self.mouth(), mrx, mry) {
            v = 95.0;
        }
        v
    }

    fn landmarks(&self) -> Vec<Point> {
        let mut pts = vec![Point::default(); face68::POINTS];
        let ellipse = |c: Point, rx: f64, ry: f64, a: f64| Point::new(c.x + rx * a.cos(), c.y + ry * a.sin());
        // jaw: lower half of the face outline, right to left
        for (k, p) in pts.iter_mut().enumerate().take(17) {
            let a = std::f64::consts::PI * (k as f64 / 16.0);
            *p = ellipse(self.p(0.5, 0.52), 0.40 * self.w, 0.47 * self.h, a);
        }
        for (k, i) in face68::RIGHT_BROW.enumerate() {
            let c = self.right_brow();
            pts[i] = Point::new(c.x - 0.10 * self.w + k as f64 * 0.05 * self.w, c.y);
        }
        for (k, i) in face68::LEFT_BROW.enumerate() {
            let c = self.left_brow();
            pts[i] = Point::new(c.x - 0.10 * self.w + k as f64 * 0.05 * self.w, c.y);
        }
        let nose = self.nose();
        for k in 0..4 {
            pts[27 + k] = Point::new(nose.x, self.h * 0.42 + k as f64 * 0.05 * self.h);
        }
        for k in 0..5 {
            pts[31 + k] = Point::new(nose.x + (k as f64 - 2.0) * 0.02 * self.w, nose.y);
        }
        let (erx, ery) = self.eye_radii();
        // eyes: corner, two upper, corner, two lower
        let eye_angles = [0.5, 0.8, 1.2, 1.5, 1.8, 2.2].map(|f: f64| f * std::f64::consts::PI);
        for (k, a) in eye_angles.iter().enumerate() {
            let r = self.right_eye();
            let l = self.left_eye();
            let angle = std::f64::consts::PI + a;
            pts[36 + k] = ellipse(r, erx, ery, angle);
            pts[42 + k] = ellipse(l, erx, ery, angle);
        }
        let (mrx, mry) = self.mouth_radii();
        for k in 0..12 {
            let a = std::f64::consts::PI + TAU * k as f64 / 12.0;
            pts[48 + k] = ellipse(self.mouth(), mrx, mry, a);
        }
        for k in 0..8 {
            let a = std::f64::consts::PI + TAU * k as f64 / 8.0;
            pts[60 + k] = ellipse(self.mouth(), 0.6 * mrx, 0.5 * mry, a);
        }
        pts
    }
}

/// Everything needed to render one video.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoPlan {
    pub video_id: String,
    pub subject_id: String,
    pub mes: Vec<MeEvent>,
    pub distractors: Vec<DistractorEvent>,
    base: GrayImage,
    noise_seed: u64,
    layout: FaceLayout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixturePlan {
    pub config: FixtureConfig,
    pub manifest: DatasetManifest,
    pub videos: Vec<VideoPlan>,
}

fn frames_path(video_id: &str) -> String {
    format!("frames/{video_id}.mesq")
}

/// Picks a start for an event of `len` frames keeping `gap` frames from every
/// taken interval and from both video ends.
fn place<R: Rng>(rng: &mut R, n: usize, len: usize, gap: usize, taken: &[(usize, usize)]) -> Option<usize> {
    if n < len + 2 * gap {
        return None;
    }
    for _ in 0..2000 {
        let start = rng.gen_range(gap..=n - gap - len);
        let end = start + len - 1;
        if taken.iter().all(|&(a, b)| end + gap < a || start > b + gap) {
            return Some(start);
        }
    }
    None
}

fn event_count<R: Rng>(rng: &mut R, rate: f64) -> usize {
    let whole = rate.floor();
    whole as usize + usize::from(rng.gen_bool(rate - whole))
}

fn plan_video(cfg: &FixtureConfig, index: usize) -> Result<VideoPlan> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let video_id = format!("vid{index:03}");
    let subject_id = format!("s{:02}", index % cfg.subjects + 1);
    let layout = FaceLayout {
        w: cfg.width as f64,
        h: cfg.height as f64,
    };
    let n = cfg.frames_per_video;
    let gap = cfg.min_separation;
    let crowded = |what: &str| {
        Error::Config(format!(
            "cannot fit another {what} into {n} frames with {gap}-frame separation"
        ))
    };

    let mut taken: Vec<(usize, usize)> = Vec::new();
    let mes_count = rng.gen_range(cfg.mes_per_video.0..=cfg.mes_per_video.1);
    let mut mes = Vec::with_capacity(mes_count);
    for _ in 0..mes_count {
        let len = rng.gen_range(cfg.me_length.0..=cfg.me_length.1);
        let start = place(&mut rng, n, len, gap, &taken).ok_or_else(|| crowded("micro-expression"))?;
        taken.push((start, start + len - 1));
        let region = match rng.gen_range(0..4) {
            0 => MeRegion::RightBrow,
            1 => MeRegion::LeftBrow,
            2 => MeRegion::BothBrows,
            _ => MeRegion::MouthCorners,
        };
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        mes.push(MeEvent {
            onset: start,
            offset: start + len - 1,
            region,
            amplitude: sign * cfg.me_amplitude * rng.gen_range(0.85..1.15),
        });
    }
    mes.sort_by_key(|m| m.onset);

    let mut distractors = Vec::new();
    for (kind, rate) in [
        (DistractorKind::Blink, cfg.blink_rate),
        (DistractorKind::HeadShift, cfg.head_shift_rate),
        (DistractorKind::MacroExpression, cfg.macro_rate),
    ] {
        for _ in 0..event_count(&mut rng, rate) {
            let (len, magnitude) = match kind {
                DistractorKind::Blink => (rng.gen_range(8..=14), rng.gen_range(70.0..100.0)),
                DistractorKind::HeadShift => {
                    let dir = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    (rng.gen_range(60..=160), dir * rng.gen_range(1.0..=2.0))
                }
                DistractorKind::MacroExpression => (rng.gen_range(80..=150), rng.gen_range(50.0..80.0)),
            };
            let start = place(&mut rng, n, len, gap, &taken).ok_or_else(|| crowded("distractor"))?;
            taken.push((start, start + len - 1));
            distractors.push(DistractorEvent {
                video_id: video_id.clone(),
                kind,
                onset: start,
                offset: start + len - 1,
                magnitude,
            });
        }
    }
    distractors.sort_by_key(|d| d.onset);

    let texture_amp = 6i32;
    let base = GrayImage::from_fn(cfg.width, cfg.height, |x, y| {
        let v = layout.shade(x as f64, y as f64) + rng.gen_range(-texture_amp..=texture_amp) as f64;
        Luma([v.round().clamp(0.0, 255.0) as u8])
    });
    let noise_seed = rng.gen();
    Ok(VideoPlan {
        video_id,
        subject_id,
        mes,
        distractors,
        base,
        noise_seed,
        layout,
    })
}

pub fn plan_fixture(cfg: &FixtureConfig) -> Result<FixturePlan> {
    cfg.validate()?;
    let videos: Vec<VideoPlan> = (0..cfg.videos).map(|i| plan_video(cfg, i)).collect::<Result<_>>()?;
    let records = videos
        .iter()
        .map(|v| VideoRecord {
            video_id: v.video_id.clone(),
            subject_id: v.subject_id.clone(),
            frame_count: cfg.frames_per_video,
            fps: cfg.fps,
            frames_path: frames_path(&v.video_id),
        })
        .collect();
    let gts = videos
        .iter()
        .flat_map(|v| {
            v.mes.iter().map(|m| GroundTruthSample {
                video_id: v.video_id.clone(),
                subject_id: v.subject_id.clone(),
                onset: m.onset,
                offset: m.offset,
            })
        })
        .collect();
    Ok(FixturePlan {
        config: cfg.clone(),
        manifest: DatasetManifest::new(records, gts)?,
        videos,
    })
}

fn gaussian(x: f64, y: f64, c: Point, sigma: f64) -> f64 {
    let d2 = (x - c.x).powi(2) + (y - c.y).powi(2);
    (-d2 / (2.0 * sigma * sigma)).exp()
}

impl VideoPlan {
    fn me_centers(&self, region: MeRegion) -> Vec<Point> {
        let l = &self.layout;
        let (mrx, _) = l.mouth_radii();
        let m = l.mouth();
        let brow_ends = |c: Point| vec![Point::new(c.x - 0.07 * l.w, c.y), Point::new(c.x + 0.07 * l.w, c.y)];
        match region {
            // one-sided movements use the inner and outer brow, so every
            // region moves two blobs
            MeRegion::RightBrow => brow_ends(l.right_brow()),
            MeRegion::LeftBrow => brow_ends(l.left_brow()),
            MeRegion::BothBrows => vec![l.right_brow(), l.left_brow()],
            MeRegion::MouthCorners => vec![Point::new(m.x - mrx, m.y), Point::new(m.x + mrx, m.y)],
        }
    }

    fn head_shift(&self, t: usize) -> f64 {
        self.distractors
            .iter()
            .filter(|d| d.kind == DistractorKind::HeadShift)
            .map(|d| d.magnitude * plateau(t, d.onset, d.offset))
            .sum()
    }

    /// Renders frame `t`.
    pub fn frame(&self, t: usize, noise: u8) -> GrayImage {
        let l = &self.layout;
        let (w, h) = self.base.dimensions();
        let shift = self.head_shift(t);
        let sigma = 0.05 * l.w;

        // (center, sigma, gray-level change) of every active blob
        let mut blobs: Vec<(Point, f64, f64)> = Vec::new();
        for me in &self.mes {
            let e = envelope(t, me.onset, me.offset);
            if e > 0.0 {
                for c in self.me_centers(me.region) {
                    blobs.push((c, sigma, me.amplitude * e));
                }
            }
        }
        for d in &self.distractors {
            let e = envelope(t, d.onset, d.offset);
            if e <= 0.0 {
                continue;
            }
            match d.kind {
                DistractorKind::Blink => {
                    for c in [l.right_eye(), l.left_eye()] {
                        blobs.push((c, 0.07 * l.w, d.magnitude * e));
                    }
                }
                DistractorKind::MacroExpression => blobs.push((l.mouth(), 0.15 * l.w, d.magnitude * e)),
                DistractorKind::HeadShift => {}
            }
        }

        let mut noise_rng = ChaCha8Rng::seed_from_u64(self.noise_seed);
        noise_rng.set_word_pos(t as u128 * (w * h) as u128 * 2);
        GrayImage::from_fn(w, h, |x, y| {
            let (fx, fy) = (x as f64, y as f64);
            let sx = fx - shift;
            let x0 = sx.floor();
            let a = sx - x0;
            let at = |xi: f64| -> f64 {
                let xi = xi.clamp(0.0, w as f64 - 1.0) as u32;
                self.base.get_pixel(xi, y)[0] as f64
            };
            let mut v = at(x0) * (1.0 - a) + at(x0 + 1.0) * a;
            for &(c, s, amp) in &blobs {
                v += amp * gaussian(sx, fy, c, s);
            }
            if noise > 0 {
                v += noise_rng.gen_range(-(noise as i32)..=noise as i32) as f64;
            }
            Luma([v.round().clamp(0.0, 255.0) as u8])
        })
    }

    pub fn render(&self, cfg: &FixtureConfig) -> FrameSequence {
        let frames = (0..cfg.frames_per_video).map(|t| self.frame(t, cfg.noise)).collect();
        FrameSequence::new(self.video_id.clone(), cfg.fps, frames).expect("uniform frames")
    }

    /// Landmarks following the injected deformations.
    pub fn landmarks(&self, cfg: &FixtureConfig) -> LandmarkTrack {
        let neutral = self.layout.landmarks();
        let unit = 0.03 * self.layout.h;
        let mut track = LandmarkTrack::new(self.video_id.clone());
        for t in 0..cfg.frames_per_video {
            let mut pts = neutral.clone();
            for me in &self.mes {
                let e = envelope(t, me.onset, me.offset);
                if e == 0.0 {
                    continue;
                }
                let lift = unit * e * me.amplitude.signum();
                match me.region {
                    MeRegion::RightBrow => face68::RIGHT_BROW.for_each(|i| pts[i].y -= lift),
                    MeRegion::LeftBrow => face68::LEFT_BROW.for_each(|i| pts[i].y -= lift),
                    MeRegion::BothBrows => face68::RIGHT_BROW
                        .chain(face68::LEFT_BROW)
                        .for_each(|i| pts[i].y -= lift),
                    MeRegion::MouthCorners => {
                        pts[face68::MOUTH_RIGHT_CORNER].x -= lift;
                        pts[face68::MOUTH_LEFT_CORNER].x += lift;
                    }
                }
            }
            for d in &self.distractors {
                let e = envelope(t, d.onset, d.offset);
                match d.kind {
                    DistractorKind::Blink if e > 0.0 => {
                        for (top, bottom) in [
                            (face68::RIGHT_EYE_TOP, face68::RIGHT_EYE_BOTTOM),
                            (face68::LEFT_EYE_TOP, face68::LEFT_EYE_BOTTOM),
                        ] {
                            for (a, b) in top.iter().zip(bottom.iter().rev()) {
                                let mid = (pts[*a].y + pts[*b].y) / 2.0;
                                pts[*a].y += (mid - pts[*a].y) * 0.9 * e;
                                pts[*b].y += (mid - pts[*b].y) * 0.9 * e;
                            }
                        }
                    }
                    DistractorKind::MacroExpression if e > 0.0 => {
                        pts[face68::MOUTH_RIGHT_CORNER].x -= 3.0 * unit * e;
                        pts[face68::MOUTH_LEFT_CORNER].x += 3.0 * unit * e;
                        pts[face68::MOUTH_BOTTOM].y += 2.0 * unit * e;
                    }
                    _ => {}
                }
            }
            let shift = self.head_shift(t);
            for p in &mut pts {
                p.x = ((p.x + shift) * 1000.0).round() / 1000.0;
                p.y = (p.y * 1000.0).round() / 1000.0;
            }
            track.frames.insert(t, pts);
        }
        track
    }
}

/// A fully rendered fixture held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub manifest: DatasetManifest,
    pub sequences: Vec<FrameSequence>,
    pub landmarks: Vec<LandmarkTrack>,
    pub distractors: Vec<DistractorEvent>,
}

pub fn generate_fixture(cfg: &FixtureConfig) -> Result<Fixture> {
    let plan = plan_fixture(cfg)?;
    Ok(Fixture {
        sequences: plan.videos.iter().map(|v| v.render(cfg)).collect(),
        landmarks: plan.videos.iter().map(|v| v.landmarks(cfg)).collect(),
        distractors: plan.videos.iter().flat_map(|v| v.distractors.clone()).collect(),
        manifest: plan.manifest,
    })
}

pub fn format_distractor_log(events: &[DistractorEvent]) -> String {
    let mut out = String::from("video_id,kind,onset,offset\n");
    for d in events {
        let _ = writeln!(out, "{},{},{},{}", d.video_id, d.kind, d.onset, d.offset);
    }
    out
}

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const LANDMARKS_FILE: &str = "landmarks.csv";
pub const DISTRACTORS_FILE: &str = "distractors.csv";

/// Writes the manifest, raw frame files, landmarks and distractor log under
/// `out`, one video at a time.
pub fn write_fixture(cfg: &FixtureConfig, out: &Path) -> Result<FixturePlan> {
    let plan = plan_fixture(cfg)?;
    let frames_dir = out.join("frames");
    std::fs::create_dir_all(&frames_dir).map_err(|e| Error::io(&frames_dir, e))?;
    let mut tracks = Vec::with_capacity(plan.videos.len());
    let mut events = Vec::new();
    for v in &plan.videos {
        write_raw(&out.join(frames_path(&v.video_id)), &v.render(cfg))?;
        tracks.push(v.landmarks(cfg));
        events.extend(v.distractors.iter().cloned());
    }
    write_landmarks(&out.join(LANDMARKS_FILE), &tracks)?;
    write_atomic(&out.join(DISTRACTORS_FILE), format_distractor_log(&events).as_bytes())?;
    write_manifest(&out.join(MANIFEST_FILE), &plan.manifest)?;
    Ok(plan)
}
