use mespot::metrics::{evaluate_videos, Criterion, EvalConfig, VideoEval};
use mespot::model::{Detection, FrameSequence, LandmarkTrack};
use mespot::spotters::{
    chi2_contrast_curve, landmark_curve, mdmd_curve, spot_landmarks, spot_lbp_chi2, spot_mdmd, threshold_peaks,
    ScoreCurve, SpotterConfig,
};
use mespot::synth::{generate_fixture, Fixture, FixtureConfig};

fn small(seed: u64) -> FixtureConfig {
    FixtureConfig {
        frames_per_video: 700,
        width: 64,
        height: 64,
        videos: 2,
        subjects: 1,
        ..FixtureConfig::clean(seed)
    }
}

/// `X` followed by `s` copies of its last frame, and `s` copies of its first
/// frame followed by `X`. Both pads are neutral frames on the clean profile.
fn padded_pair(seq: &FrameSequence, s: usize) -> (FrameSequence, FrameSequence) {
    let first = seq.frames[0].clone();
    let last = seq.frames[seq.len() - 1].clone();
    let mut tail = seq.frames.clone();
    tail.extend(std::iter::repeat_n(last, s));
    let mut head: Vec<_> = std::iter::repeat_n(first, s).collect();
    head.extend(seq.frames.iter().cloned());
    (
        FrameSequence::new(&seq.video_id, seq.fps, tail).unwrap(),
        FrameSequence::new(&seq.video_id, seq.fps, head).unwrap(),
    )
}

fn assert_shifted(a: &ScoreCurve, b: &ScoreCurve, s: usize, cfg: &SpotterConfig, what: &str) {
    assert_eq!(a.values.len(), b.values.len());
    let n = a.values.len();
    for i in 0..n - s {
        assert_eq!(a.values[i], b.values[i + s], "{what} at {i}");
    }
    let pa: Vec<usize> = threshold_peaks(a, cfg).iter().map(|p| p.0 + s).collect();
    let pb: Vec<usize> = threshold_peaks(b, cfg).iter().map(|p| p.0).collect();
    assert!(!pa.is_empty(), "{what}: no peaks");
    assert_eq!(pa, pb, "{what}");
}

#[test]
fn curves_are_translation_covariant() {
    let cfg = SpotterConfig::default();
    let fx = generate_fixture(&small(31)).unwrap();
    for s in [1, 13, 40] {
        let (a, b) = padded_pair(&fx.sequences[0], s);
        assert_shifted(
            &chi2_contrast_curve(&a, &cfg).unwrap(),
            &chi2_contrast_curve(&b, &cfg).unwrap(),
            s,
            &cfg,
            "chi2",
        );
        assert_shifted(
            &mdmd_curve(&a, &cfg).unwrap(),
            &mdmd_curve(&b, &cfg).unwrap(),
            s,
            &cfg,
            "mdmd",
        );

        let track = &fx.landmarks[0];
        let n = track.frames.len();
        let mut ta = LandmarkTrack::new(&track.video_id);
        let mut tb = LandmarkTrack::new(&track.video_id);
        for t in 0..n + s {
            ta.frames.insert(t, track.frames[&t.min(n - 1)].clone());
            tb.frames.insert(t, track.frames[&t.saturating_sub(s)].clone());
        }
        assert_shifted(
            &landmark_curve(&ta, n + s, &cfg).unwrap(),
            &landmark_curve(&tb, n + s, &cfg).unwrap(),
            s,
            &cfg,
            "landmark",
        );
    }
}

fn check_detections(dets: &[Detection], n: usize, cfg: &SpotterConfig) {
    for (i, d) in dets.iter().enumerate() {
        assert_eq!(d.length, cfg.window);
        assert!(d.center < n);
        assert!(d.score.is_finite() && d.score > 0.0);
        for e in &dets[i + 1..] {
            assert!(e.center >= d.center + cfg.window, "{d:?} and {e:?} too close");
        }
    }
}

#[test]
fn spotter_outputs_respect_the_detection_invariants() {
    let cfg = SpotterConfig::default();
    let fx = generate_fixture(&FixtureConfig {
        blink_rate: 3.0,
        head_shift_rate: 1.0,
        macro_rate: 1.0,
        frames_per_video: 1400,
        ..small(17)
    })
    .unwrap();
    for (seq, track) in fx.sequences.iter().zip(&fx.landmarks) {
        let n = seq.len();
        check_detections(&spot_lbp_chi2(seq, &cfg).unwrap(), n, &cfg);
        check_detections(&spot_mdmd(seq, &cfg).unwrap(), n, &cfg);
        check_detections(&spot_landmarks(track, n, &cfg).unwrap(), n, &cfg);
    }
}

fn evaluate(fx: &Fixture, dets: impl Fn(usize) -> Vec<Detection>) -> (usize, usize) {
    let videos: Vec<VideoEval> = fx
        .manifest
        .videos
        .iter()
        .enumerate()
        .map(|(i, v)| VideoEval {
            video_id: v.video_id.clone(),
            gts: fx.manifest.ground_truth_for(&v.video_id).cloned().collect(),
            dets: dets(i),
        })
        .collect();
    let (counts, _) = evaluate_videos(&videos, &EvalConfig::with_criterion(Criterion::Center)).unwrap();
    (counts.tp, counts.fn_)
}

#[test]
fn permissive_threshold_matches_every_injected_event() {
    let cfg = SpotterConfig {
        peak_fraction: 0.05,
        ..SpotterConfig::default()
    };
    for seed in [1, 2, 3] {
        let fx = generate_fixture(&FixtureConfig {
            mes_per_video: (2, 2),
            ..small(seed)
        })
        .unwrap();
        let (tp, fn_) = evaluate(&fx, |i| spot_lbp_chi2(&fx.sequences[i], &cfg).unwrap());
        assert_eq!((tp, fn_), (4, 0), "seed {seed}");
    }
}

/// Peak height at each injection site over the RMS of the curve far from
/// every injection, with a floor of one hundredth of the weakest peak so that
/// a noiseless background does not divide by zero.
fn snr(fx: &Fixture, video: usize, cfg: &SpotterConfig) -> f64 {
    let curve = chi2_contrast_curve(&fx.sequences[video], cfg).unwrap();
    let gts: Vec<_> = fx
        .manifest
        .ground_truth_for(&fx.manifest.videos[video].video_id)
        .collect();
    let l = cfg.window;
    let weakest = gts
        .iter()
        .map(|g| curve.values[g.onset..=g.offset].iter().cloned().fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    let margin = l / 2;
    let background: Vec<f64> = (margin..curve.values.len() - margin)
        .filter(|&t| gts.iter().all(|g| t + l < g.onset || t > g.offset + l))
        .map(|t| curve.values[t])
        .collect();
    assert!(background.len() > 100);
    let rms = (background.iter().map(|v| v * v).sum::<f64>() / background.len() as f64).sqrt();
    weakest / rms.max(weakest / 100.0)
}

#[test]
fn clean_profile_injections_stand_out_of_the_background() {
    let cfg = SpotterConfig::default();
    for seed in [2024, 7] {
        let fx = generate_fixture(&small(seed)).unwrap();
        for v in 0..fx.sequences.len() {
            let r = snr(&fx, v, &cfg);
            assert!(r > 5.0, "seed {seed} video {v}: SNR {r}");
        }
    }
}

#[test]
fn distractors_are_logged_but_never_ground_truth() {
    let fx = generate_fixture(&FixtureConfig {
        blink_rate: 3.0,
        head_shift_rate: 1.0,
        macro_rate: 1.0,
        frames_per_video: 1400,
        ..small(5)
    })
    .unwrap();
    assert!(!fx.distractors.is_empty());
    assert_eq!(fx.manifest.stats.samples, 6);
    for g in &fx.manifest.ground_truth {
        assert!((10..=51).contains(&g.length()));
    }
}
