//! Evaluation mathematics: interval IoU, one-to-one matching under the
//! center or IoU criterion, cumulative precision/recall/F1, frame-based
//! accuracy and DET-curve points.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{DatasetStats, Detection, GroundTruthSample, Interval};

pub const DEFAULT_EPSILON: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Criterion {
    /// Hit when `|C_w - C_gt| <= 0.5 * L_gt`.
    #[default]
    Center,
    /// Hit when `IoU >= epsilon`.
    Iou,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Center => "center",
            Criterion::Iou => "iou",
        })
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "center" => Ok(Criterion::Center),
            "iou" => Ok(Criterion::Iou),
            other => Err(Error::Config(format!("unknown criterion {other:?} (center|iou)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub epsilon: f64,
    pub criterion: Criterion,
    /// Drop the length term from frame-based accuracy.
    pub apex_mode: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            epsilon: DEFAULT_EPSILON,
            criterion: Criterion::Center,
            apex_mode: false,
        }
    }
}

impl EvalConfig {
    pub fn with_criterion(criterion: Criterion) -> Self {
        EvalConfig {
            criterion,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::Config(format!("epsilon {} outside (0, 1]", self.epsilon)));
        }
        Ok(())
    }
}

/// Frame-count intersection over union, endpoints inclusive.
pub fn iou(a: &Interval, b: &Interval) -> f64 {
    let inter = a.intersection(b);
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    pub gt: GroundTruthSample,
    pub det: Detection,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchResult {
    pub pairs: Vec<MatchedPair>,
    /// Misses.
    pub unmatched_gt: Vec<GroundTruthSample>,
    /// False detections.
    pub unmatched_det: Vec<Detection>,
}

impl MatchResult {
    pub fn counts(&self) -> EvalCounts {
        EvalCounts {
            tp: self.pairs.len(),
            fp: self.unmatched_det.len(),
            fn_: self.unmatched_gt.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct EvalCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl EvalCounts {
    pub const fn new(tp: usize, fp: usize, fn_: usize) -> Self {
        EvalCounts { tp, fp, fn_ }
    }
}

impl Add for EvalCounts {
    type Output = EvalCounts;

    fn add(self, rhs: EvalCounts) -> EvalCounts {
        EvalCounts::new(self.tp + rhs.tp, self.fp + rhs.fp, self.fn_ + rhs.fn_)
    }
}

impl AddAssign for EvalCounts {
    fn add_assign(&mut self, rhs: EvalCounts) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for EvalCounts {
    fn sum<I: Iterator<Item = EvalCounts>>(iter: I) -> Self {
        iter.fold(EvalCounts::default(), Add::add)
    }
}

/// Preference key for a feasible (gt, detection) edge; smaller is better.
#[derive(Debug, Clone, Copy)]
struct EdgeKey {
    primary: f64,
    center: usize,
    gt_onset: usize,
}

fn edge_key(gt: &GroundTruthSample, det: &Detection, cfg: &EvalConfig) -> Option<EdgeKey> {
    let primary = match cfg.criterion {
        Criterion::Center => {
            let dist = det.center.abs_diff(gt.center());
            // 2|C_w - C_gt| <= L_gt, exact in integers
            if 2 * dist > gt.length() {
                return None;
            }
            dist as f64
        }
        Criterion::Iou => {
            let v = iou(&gt.interval(), &det.interval());
            if v < cfg.epsilon {
                return None;
            }
            -v
        }
    };
    Some(EdgeKey {
        primary,
        center: det.center,
        gt_onset: gt.onset,
    })
}

fn cmp_keys(a: &EdgeKey, b: &EdgeKey) -> Ordering {
    a.primary
        .total_cmp(&b.primary)
        .then(a.center.cmp(&b.center))
        .then(a.gt_onset.cmp(&b.gt_onset))
}

fn check_same_video(gts: &[GroundTruthSample], dets: &[Detection]) -> Result<()> {
    let mut ids = gts
        .iter()
        .map(|g| g.video_id.as_str())
        .chain(dets.iter().map(|d| d.video_id.as_str()));
    if let Some(first) = ids.next() {
        if let Some(other) = ids.find(|id| *id != first) {
            return Err(Error::Argument(format!(
                "matching mixes videos {first} and {other}; match per video"
            )));
        }
    }
    for g in gts {
        if g.offset < g.onset {
            return Err(Error::Argument(format!(
                "ground truth [{}, {}] reversed",
                g.onset, g.offset
            )));
        }
    }
    for d in dets {
        if d.length == 0 || !d.score.is_finite() {
            return Err(Error::Argument(format!(
                "invalid detection (center {}, length {}, score {})",
                d.center, d.length, d.score
            )));
        }
    }
    Ok(())
}

/// One-to-one matching of the detections of a single video.
///
/// Feasible pairs are accepted greedily in preference order (closest center,
/// or highest IoU; ties to the lower detection center, then the lower gt
/// onset). The greedy matching is then grown along augmenting paths, so the
/// number of hits is the maximum any one-to-one assignment can reach. Inputs
/// are put in a canonical order first, making the result independent of the
/// order of `gts` and `dets`.
pub fn match_detections(gts: &[GroundTruthSample], dets: &[Detection], cfg: &EvalConfig) -> Result<MatchResult> {
    cfg.validate()?;
    check_same_video(gts, dets)?;

    let mut gt_order: Vec<usize> = (0..gts.len()).collect();
    gt_order.sort_by(|&a, &b| (gts[a].onset, gts[a].offset).cmp(&(gts[b].onset, gts[b].offset)));
    let mut det_order: Vec<usize> = (0..dets.len()).collect();
    det_order.sort_by(|&a, &b| {
        let (x, y) = (&dets[a], &dets[b]);
        x.center
            .cmp(&y.center)
            .then(x.length.cmp(&y.length))
            .then(y.score.total_cmp(&x.score))
    });
    let gts: Vec<&GroundTruthSample> = gt_order.iter().map(|&i| &gts[i]).collect();
    let dets: Vec<&Detection> = det_order.iter().map(|&i| &dets[i]).collect();

    // adjacency per gt, in preference order
    let mut edges: Vec<(usize, usize, EdgeKey)> = Vec::new();
    for (gi, g) in gts.iter().enumerate() {
        for (di, d) in dets.iter().enumerate() {
            if let Some(k) = edge_key(g, d, cfg) {
                edges.push((gi, di, k));
            }
        }
    }
    edges.sort_by(|a, b| cmp_keys(&a.2, &b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); gts.len()];
    for &(gi, di, _) in &edges {
        adjacency[gi].push(di);
    }

    let mut gt_match: Vec<Option<usize>> = vec![None; gts.len()];
    let mut det_match: Vec<Option<usize>> = vec![None; dets.len()];
    for &(gi, di, _) in &edges {
        if gt_match[gi].is_none() && det_match[di].is_none() {
            gt_match[gi] = Some(di);
            det_match[di] = Some(gi);
        }
    }

    fn augment(
        gi: usize,
        adjacency: &[Vec<usize>],
        visited: &mut [bool],
        gt_match: &mut [Option<usize>],
        det_match: &mut [Option<usize>],
    ) -> bool {
        for &di in &adjacency[gi] {
            if visited[di] {
                continue;
            }
            visited[di] = true;
            let free = match det_match[di] {
                None => true,
                Some(other) => augment(other, adjacency, visited, gt_match, det_match),
            };
            if free {
                gt_match[gi] = Some(di);
                det_match[di] = Some(gi);
                return true;
            }
        }
        false
    }

    for gi in 0..gts.len() {
        if gt_match[gi].is_none() {
            let mut visited = vec![false; dets.len()];
            augment(gi, &adjacency, &mut visited, &mut gt_match, &mut det_match);
        }
    }

    let mut result = MatchResult::default();
    for (gi, m) in gt_match.iter().enumerate() {
        match m {
            Some(di) => result.pairs.push(MatchedPair {
                gt: gts[gi].clone(),
                det: dets[*di].clone(),
            }),
            None => result.unmatched_gt.push(gts[gi].clone()),
        }
    }
    for (di, m) in det_match.iter().enumerate() {
        if m.is_none() {
            result.unmatched_det.push(dets[di].clone());
        }
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Precision, recall and F1 from cumulative counts. Zero denominators give 0.
pub fn prf1(counts: EvalCounts) -> Prf {
    let tp = counts.tp as f64;
    let precision = ratio(tp, tp + counts.fp as f64);
    let recall = ratio(tp, tp + counts.fn_ as f64);
    let f1 = ratio(2.0 * precision * recall, precision + recall);
    Prf { precision, recall, f1 }
}

/// Mean normalized deviation of matched pairs; 0 means every hit is exact.
///
/// Interval mode: `(|C_w - C_gt| + |L_w - L_gt|) / (2 L_gt)`.
/// Apex mode: `|C_w - C_gt| / L_gt`.
pub fn frame_accuracy(pairs: &[MatchedPair], apex_mode: bool) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::UndefinedMetric(
            "frame-based accuracy needs at least one true positive".into(),
        ));
    }
    let total: f64 = pairs
        .iter()
        .map(|p| {
            let dc = p.det.center.abs_diff(p.gt.center()) as f64;
            let lgt = p.gt.length() as f64;
            if apex_mode {
                dc / lgt
            } else {
                let dl = p.det.length.abs_diff(p.gt.length()) as f64;
                (dc + dl) / (2.0 * lgt)
            }
        })
        .sum();
    Ok(total / pairs.len() as f64)
}

/// Ground truth and detections of one video.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VideoEval {
    pub video_id: String,
    pub gts: Vec<GroundTruthSample>,
    pub dets: Vec<Detection>,
}

/// Matches every video and sums the counts; also returns all hit pairs.
pub fn evaluate_videos(videos: &[VideoEval], cfg: &EvalConfig) -> Result<(EvalCounts, Vec<MatchedPair>)> {
    let mut counts = EvalCounts::default();
    let mut pairs = Vec::new();
    for v in videos {
        let m = match_detections(&v.gts, &v.dets, cfg)?;
        counts += m.counts();
        pairs.extend(m.pairs);
    }
    Ok((counts, pairs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetPoint {
    pub threshold: f64,
    /// False positives per video.
    pub fppv: f64,
    pub miss_rate: f64,
}

/// Distinct detection scores in descending order, preceded by `+inf`.
pub fn default_thresholds<'a>(dets: impl IntoIterator<Item = &'a Detection>) -> Vec<f64> {
    let mut scores: Vec<f64> = dets.into_iter().map(|d| d.score).collect();
    scores.sort_by(|a, b| b.total_cmp(a));
    scores.dedup();
    let mut out = Vec::with_capacity(scores.len() + 1);
    out.push(f64::INFINITY);
    out.extend(scores);
    out
}

/// DET-curve points over a threshold sweep.
///
/// At each threshold `t`, detections scoring `>= t` are matched per video and
/// counts are summed over all folds: `fppv = sum FP / V`,
/// `miss_rate = 1 - sum TP / N_plus`. Points come back in descending
/// threshold order. `thresholds = None` sweeps [`default_thresholds`].
pub fn det_points(
    folds: &[Vec<VideoEval>],
    stats: &DatasetStats,
    thresholds: Option<&[f64]>,
    cfg: &EvalConfig,
) -> Result<Vec<DetPoint>> {
    if stats.videos == 0 || stats.samples == 0 {
        return Err(Error::Config(format!(
            "DET points need V > 0 and N_plus > 0 (V = {}, N_plus = {})",
            stats.videos, stats.samples
        )));
    }
    let mut sweep = match thresholds {
        Some(t) => {
            if t.iter().any(|x| x.is_nan()) {
                return Err(Error::Argument("NaN threshold".into()));
            }
            t.to_vec()
        }
        None => default_thresholds(folds.iter().flatten().flat_map(|v| v.dets.iter())),
    };
    sweep.sort_by(|a, b| b.total_cmp(a));
    sweep.dedup();

    let mut points = Vec::with_capacity(sweep.len());
    for &t in &sweep {
        let mut counts = EvalCounts::default();
        for video in folds.iter().flatten() {
            let kept: Vec<Detection> = video.dets.iter().filter(|d| d.score >= t).cloned().collect();
            counts += match_detections(&video.gts, &kept, cfg)?.counts();
        }
        points.push(DetPoint {
            threshold: t,
            fppv: counts.fp as f64 / stats.videos as f64,
            miss_rate: 1.0 - counts.tp as f64 / stats.samples as f64,
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gt(onset: usize, offset: usize) -> GroundTruthSample {
        GroundTruthSample::new("v", "s", onset, offset).unwrap()
    }

    /// gt with the given center and length (odd lengths are exact).
    fn gt_cl(center: usize, length: usize) -> GroundTruthSample {
        let onset = center - (length - 1) / 2;
        gt(onset, onset + length - 1)
    }

    fn det(center: usize, length: usize, score: f64) -> Detection {
        Detection::new("v", center, length, score).unwrap()
    }

    fn iv(a: i64, b: i64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn iou_examples() {
        assert_eq!(iou(&iv(100, 134), &iv(100, 134)), 1.0);
        assert_eq!(iou(&iv(0, 10), &iv(20, 30)), 0.0);
        // enumerate frames of both intervals
        let a: std::collections::BTreeSet<i64> = (100..=134).collect();
        let b: std::collections::BTreeSet<i64> = (118..=152).collect();
        let expect = a.intersection(&b).count() as f64 / a.union(&b).count() as f64;
        assert_eq!(expect, 17.0 / 53.0);
        assert_eq!(iou(&iv(100, 134), &iv(118, 152)), expect);
    }

    #[test]
    fn center_criterion_boundary() {
        let cfg = EvalConfig::default();
        // C_gt = 100, L_gt = 20 -> onset 91, offset 110 has floor center 100
        let g = gt(91, 110);
        assert_eq!((g.center(), g.length()), (100, 20));
        let hit = match_detections(std::slice::from_ref(&g), &[det(109, 35, 1.0)], &cfg).unwrap();
        assert_eq!(hit.counts(), EvalCounts::new(1, 0, 0));
        let miss = match_detections(std::slice::from_ref(&g), &[det(111, 35, 1.0)], &cfg).unwrap();
        assert_eq!(miss.counts(), EvalCounts::new(0, 1, 1));
        let none = match_detections(std::slice::from_ref(&g), &[], &cfg).unwrap();
        assert!(none.pairs.is_empty());
        assert_eq!(none.unmatched_gt, vec![g]);
    }

    #[test]
    fn iou_rejects_short_gt_for_fixed_window() {
        let center = EvalConfig::default();
        let iou_cfg = EvalConfig::with_criterion(Criterion::Iou);
        for len in (1..=17).step_by(2) {
            let g = gt_cl(200, len);
            let d = det(200, 35, 1.0);
            assert_eq!(
                match_detections(std::slice::from_ref(&g), std::slice::from_ref(&d), &iou_cfg)
                    .unwrap()
                    .counts()
                    .tp,
                0
            );
            assert_eq!(match_detections(&[g], &[d], &center).unwrap().counts().tp, 1);
        }
        // 18 frames inside a 35-frame window reaches IoU 18/35 > 0.5
        let g = gt(192, 209);
        assert_eq!(
            match_detections(&[g], &[det(200, 35, 1.0)], &iou_cfg)
                .unwrap()
                .counts()
                .tp,
            1
        );
    }

    #[test]
    fn greedy_alone_would_lose_a_hit() {
        // det at 104 is closest to gt1 but is the only det gt2 can take.
        let g1 = gt_cl(100, 41);
        let g2 = gt_cl(110, 21);
        let m = match_detections(
            &[g1, g2],
            &[det(104, 35, 1.0), det(85, 35, 1.0)],
            &EvalConfig::default(),
        )
        .unwrap();
        assert_eq!(m.counts(), EvalCounts::new(2, 0, 0));
    }

    #[test]
    fn mixing_videos_is_an_error() {
        let other = Detection::new("w", 10, 35, 1.0).unwrap();
        assert!(match_detections(&[gt(0, 20)], &[other], &EvalConfig::default()).is_err());
        let bad = EvalConfig {
            epsilon: 0.0,
            ..EvalConfig::default()
        };
        assert!(match_detections(&[], &[], &bad).is_err());
    }

    fn truncated4(x: f64) -> f64 {
        (x * 1e4).floor() / 1e4
    }

    #[test]
    fn prf1_reported_rows() {
        // published values are truncated, not rounded, to four decimals
        for (counts, (p, r, f)) in [
            (EvalCounts::new(21, 443, 145), (0.0452, 0.1265, 0.0666)),
            (EvalCounts::new(26, 438, 140), (0.0560, 0.1566, 0.0825)),
            (EvalCounts::new(20, 841, 146), (0.0232, 0.1204, 0.0389)),
        ] {
            let got = prf1(counts);
            for (value, printed) in [(got.precision, p), (got.recall, r), (got.f1, f)] {
                assert!((truncated4(value) - printed).abs() < 1e-9, "{got:?}");
            }
        }
        let exact = prf1(EvalCounts::new(21, 443, 145));
        assert_eq!(exact.precision, 21.0 / 464.0);
        assert_eq!(exact.recall, 21.0 / 166.0);
        assert!((exact.f1 - 42.0 / 630.0).abs() < 1e-15);
    }

    #[test]
    fn prf1_zero_denominators() {
        assert_eq!(
            prf1(EvalCounts::default()),
            Prf {
                precision: 0.0,
                recall: 0.0,
                f1: 0.0
            }
        );
        let p = prf1(EvalCounts::new(0, 5, 3));
        assert_eq!((p.precision, p.recall, p.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn frame_accuracy_examples() {
        let exact = MatchedPair {
            gt: gt_cl(100, 25),
            det: det(100, 25, 1.0),
        };
        assert_eq!(frame_accuracy(&[exact.clone(), exact], false).unwrap(), 0.0);
        let pair = MatchedPair {
            gt: gt_cl(100, 25),
            det: det(105, 35, 1.0),
        };
        assert_eq!(frame_accuracy(std::slice::from_ref(&pair), false).unwrap(), 0.3);
        assert_eq!(frame_accuracy(&[pair], true).unwrap(), 0.2);
        assert!(matches!(frame_accuracy(&[], false), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn det_examples() {
        let stats = DatasetStats {
            videos: 1,
            subjects: 1,
            samples: 1,
        };
        let video = VideoEval {
            video_id: "v".into(),
            gts: vec![gt_cl(100, 21)],
            dets: vec![det(100, 35, 0.9), det(300, 35, 0.8)],
        };
        let folds = vec![vec![video]];
        let cfg = EvalConfig::default();
        let pts = det_points(&folds, &stats, Some(&[1.0, 0.5]), &cfg).unwrap();
        assert_eq!((pts[0].fppv, pts[0].miss_rate), (0.0, 1.0));
        assert_eq!((pts[1].fppv, pts[1].miss_rate), (1.0, 0.0));

        let all = det_points(&folds, &stats, None, &cfg).unwrap();
        let thresholds: Vec<f64> = all.iter().map(|p| p.threshold).collect();
        assert_eq!(thresholds, vec![f64::INFINITY, 0.9, 0.8]);

        let empty = DatasetStats { samples: 0, ..stats };
        assert!(matches!(det_points(&folds, &empty, None, &cfg), Err(Error::Config(_))));
    }

    /// Exhaustive maximum one-to-one matching: try every injective assignment.
    fn brute_force_max(gts: &[GroundTruthSample], dets: &[Detection], cfg: &EvalConfig) -> usize {
        fn go(i: usize, gts: &[GroundTruthSample], dets: &[Detection], used: &mut [bool], cfg: &EvalConfig) -> usize {
            if i == gts.len() {
                return 0;
            }
            let mut best = go(i + 1, gts, dets, used, cfg);
            for j in 0..dets.len() {
                if used[j] {
                    continue;
                }
                let ok = match cfg.criterion {
                    Criterion::Center => {
                        (dets[j].center as f64 - gts[i].center() as f64).abs() <= 0.5 * gts[i].length() as f64
                    }
                    Criterion::Iou => iou(&gts[i].interval(), &dets[j].interval()) >= cfg.epsilon,
                };
                if ok {
                    used[j] = true;
                    best = best.max(1 + go(i + 1, gts, dets, used, cfg));
                    used[j] = false;
                }
            }
            best
        }
        go(0, gts, dets, &mut vec![false; dets.len()], cfg)
    }

    fn instance() -> impl Strategy<Value = (Vec<GroundTruthSample>, Vec<Detection>)> {
        let g = prop::collection::vec((0usize..120, 1usize..40), 0..=5)
            .prop_map(|v| v.into_iter().map(|(o, l)| gt(o, o + l - 1)).collect::<Vec<_>>());
        let d = prop::collection::vec((0usize..160, 1usize..50, 0.0f64..1.0), 0..=5)
            .prop_map(|v| v.into_iter().map(|(c, l, s)| det(c, l, s)).collect::<Vec<_>>());
        (g, d)
    }

    proptest! {
        #[test]
        fn matching_counts_are_consistent_and_maximal((gts, dets) in instance(), use_iou in any::<bool>()) {
            let cfg = EvalConfig::with_criterion(if use_iou { Criterion::Iou } else { Criterion::Center });
            let m = match_detections(&gts, &dets, &cfg).unwrap();
            let c = m.counts();
            prop_assert_eq!(c.tp + c.fn_, gts.len());
            prop_assert_eq!(c.tp + c.fp, dets.len());
            prop_assert_eq!(c.tp, brute_force_max(&gts, &dets, &cfg));
        }

        #[test]
        fn matching_ignores_input_order((gts, dets) in instance(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (mut g2, mut d2) = (gts.clone(), dets.clone());
            g2.shuffle(&mut rng);
            d2.shuffle(&mut rng);
            let cfg = EvalConfig::default();
            let a = match_detections(&gts, &dets, &cfg).unwrap();
            let b = match_detections(&g2, &d2, &cfg).unwrap();
            prop_assert_eq!(a.counts(), b.counts());
        }

        #[test]
        fn f1_monotone_in_tp(tp in 0usize..500, fp in 0usize..500, fn_ in 0usize..500) {
            let lo = prf1(EvalCounts::new(tp, fp, fn_)).f1;
            let hi = prf1(EvalCounts::new(tp + 1, fp, fn_)).f1;
            prop_assert!(hi >= lo);
        }

        #[test]
        fn center_shift_changes_f_linearly(
            items in prop::collection::vec((100usize..1000, 0usize..25, 0usize..1), 1..8),
        ) {
            // exact lengths; shift each detection by delta <= L_gt/2 so it stays matched
            let mut base = Vec::new();
            let mut shifted = Vec::new();
            let mut expected = 0.0;
            for (c, len_half, _) in &items {
                let length = 2 * len_half + 1;
                let g = gt_cl(*c, length);
                let delta = len_half / 2;
                base.push(MatchedPair { gt: g.clone(), det: det(*c, length, 1.0) });
                shifted.push(MatchedPair { gt: g, det: det(*c + delta, length, 1.0) });
                expected += delta as f64 / (2.0 * length as f64);
            }
            expected /= items.len() as f64;
            let f0 = frame_accuracy(&base, false).unwrap();
            let f1 = frame_accuracy(&shifted, false).unwrap();
            prop_assert!((f1 - f0 - expected).abs() < 1e-12);
        }

        #[test]
        fn det_curve_is_monotone((gts, dets) in instance()) {
            let stats = DatasetStats { videos: 1, subjects: 1, samples: gts.len().max(1) };
            let folds = vec![vec![VideoEval { video_id: "v".into(), gts, dets }]];
            for criterion in [Criterion::Center, Criterion::Iou] {
                let pts = det_points(&folds, &stats, None, &EvalConfig::with_criterion(criterion)).unwrap();
                prop_assert_eq!((pts[0].fppv, pts[0].miss_rate), (0.0, 1.0));
                for w in pts.windows(2) {
                    prop_assert!(w[1].threshold < w[0].threshold);
                    prop_assert!(w[1].fppv >= w[0].fppv);
                    prop_assert!(w[1].miss_rate <= w[0].miss_rate);
                }
            }
        }
    }
}
