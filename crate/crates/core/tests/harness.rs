use std::collections::BTreeSet;
use std::path::Path;

use mespot::harness::{
    format_metrics_csv, loso_folds, render_report, report_from_detections, run_benchmark, run_folds, spot_video,
    train_supervised, FoldSplit, SpotterSpec, DET_FILE, METRICS_FILE, SUMMARY_FILE,
};
use mespot::metrics::{evaluate_videos, prf1, Criterion, EvalConfig, EvalCounts, VideoEval};
use mespot::model::{parse_manifest, read_landmarks, DatasetManifest};
use mespot::spotters::SpotterConfig;
use mespot::stfeatures::{StFeatureConfig, TrainParams};
use mespot::synth::{write_fixture, FixtureConfig, LANDMARKS_FILE, MANIFEST_FILE};
use mespot::Error;

fn small(seed: u64) -> FixtureConfig {
    FixtureConfig {
        frames_per_video: 600,
        width: 64,
        height: 64,
        videos: 6,
        subjects: 3,
        ..FixtureConfig::clean(seed)
    }
}

fn fixture(dir: &Path, cfg: &FixtureConfig) -> DatasetManifest {
    write_fixture(cfg, dir).unwrap();
    parse_manifest(&dir.join(MANIFEST_FILE)).unwrap()
}

fn chi2() -> SpotterSpec {
    SpotterSpec::LbpChi2(SpotterConfig::default())
}

#[test]
fn loso_partitions_videos_by_subject() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), &small(3));
    let folds = loso_folds(&m).unwrap();
    assert_eq!(folds.len(), 3);
    let mut tested = BTreeSet::new();
    for f in &folds {
        let train: BTreeSet<&String> = f.train_videos.iter().collect();
        let test: BTreeSet<&String> = f.test_videos.iter().collect();
        assert!(train.is_disjoint(&test));
        assert_eq!(train.len() + test.len(), m.videos.len());
        for id in &f.test_videos {
            assert_eq!(m.video(id).unwrap().subject_id, f.test_subject);
            assert!(tested.insert(id.clone()), "{id} tested twice");
        }
        for id in &f.train_videos {
            assert_ne!(m.video(id).unwrap().subject_id, f.test_subject);
        }
    }
    assert_eq!(tested.len(), m.videos.len());
}

#[test]
fn overall_counts_are_fold_sums_under_any_partition() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), &small(5));
    let eval = EvalConfig::default();
    let loso = run_benchmark(&m, dir.path(), &chi2(), &eval).unwrap();

    // one video per fold
    let singles: Vec<FoldSplit> = m
        .videos
        .iter()
        .map(|v| FoldSplit {
            test_subject: v.video_id.clone(),
            train_videos: vec![],
            test_videos: vec![v.video_id.clone()],
        })
        .collect();
    let split = run_folds(&m, dir.path(), &singles, &chi2(), &eval).unwrap();

    for report in [&loso, &split] {
        let center: EvalCounts = report.folds.iter().map(|f| f.center).sum();
        let iou: EvalCounts = report.folds.iter().map(|f| f.iou).sum();
        assert_eq!(center, report.summary(Criterion::Center).counts);
        assert_eq!(iou, report.summary(Criterion::Iou).counts);
        for s in &report.overall {
            assert_eq!(s.prf, prf1(s.counts));
        }
    }
    for (a, b) in loso.overall.iter().zip(&split.overall) {
        assert_eq!((a.counts, a.prf), (b.counts, b.prf));
        // frame_F sums pairs in fold order, so only the last digits may move
        assert!((a.frame_f.unwrap_or(0.0) - b.frame_f.unwrap_or(0.0)).abs() < 1e-12);
    }
    assert_eq!(loso.det, split.det);
    assert_eq!(
        loso.summary(Criterion::Center).counts.tp + loso.summary(Criterion::Center).counts.fn_,
        18
    );
}

#[test]
fn one_fold_equals_direct_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), &small(8));
    let subject = m.subjects()[0].clone();
    let videos: Vec<String> = m
        .videos
        .iter()
        .filter(|v| v.subject_id == subject)
        .map(|v| v.video_id.clone())
        .collect();
    let fold = FoldSplit {
        test_subject: subject,
        train_videos: vec![],
        test_videos: videos.clone(),
    };
    let eval = EvalConfig::default();
    let report = run_folds(&m, dir.path(), &[fold], &chi2(), &eval).unwrap();

    let direct: Vec<VideoEval> = videos
        .iter()
        .map(|id| VideoEval {
            video_id: id.clone(),
            gts: m.ground_truth_for(id).cloned().collect(),
            dets: spot_video(&chi2(), &m, dir.path(), id, None).unwrap(),
        })
        .collect();
    let (counts, _) = evaluate_videos(&direct, &eval).unwrap();
    assert_eq!(report.summary(Criterion::Center).counts, counts);
    assert_eq!(report.summary(Criterion::Center).prf, prf1(counts));
    assert_eq!(report.stats.videos, videos.len());
}

#[test]
fn repeated_runs_render_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), &small(11));
    let eval = EvalConfig::default();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let a = run_benchmark(&m, dir.path(), &chi2(), &eval).unwrap();
    let b = run_benchmark(&m, dir.path(), &chi2(), &eval).unwrap();
    assert_eq!(a, b);
    render_report(&a, &out_a).unwrap();
    render_report(&b, &out_b).unwrap();
    render_report(&a, &out_a).unwrap();
    for name in [SUMMARY_FILE, METRICS_FILE, DET_FILE] {
        let x = std::fs::read(out_a.join(name)).unwrap();
        let y = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let det = std::fs::read_to_string(out_a.join(DET_FILE)).unwrap();
    let thresholds: Vec<f64> = det
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(thresholds.len() >= 3);
    assert!(thresholds.windows(2).all(|w| w[0] > w[1]));
    assert_eq!(thresholds[0], f64::INFINITY);
}

#[test]
fn zero_detections_report() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), &small(2));
    let report = report_from_detections(&m, &[], &EvalConfig::default(), "none").unwrap();
    let csv = format_metrics_csv(&report);
    let n = m.stats.samples;
    assert_eq!(
        csv,
        format!("criterion,TP,FP,FN,precision,recall,f1,frame_F\ncenter,0,0,{n},0,0,0,NA\niou,0,0,{n},0,0,0,NA\n")
    );
    assert_eq!(report.det.len(), 1);
    assert_eq!((report.det[0].fppv, report.det[0].miss_rate), (0.0, 1.0));
}

#[test]
fn missing_frames_abort_before_any_fold() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), &small(4));
    let victim = m.videos.last().unwrap();
    std::fs::remove_file(dir.path().join(&victim.frames_path)).unwrap();
    let err = run_benchmark(&m, dir.path(), &chi2(), &EvalConfig::default()).unwrap_err();
    match err {
        Error::Io { path, source } => {
            assert!(path.ends_with(&victim.frames_path));
            assert!(source.to_string().contains(&victim.video_id));
        }
        other => panic!("expected an I/O error, got {other:?}"),
    }
}

#[test]
fn spotter_failure_is_a_fold_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), &small(4));
    // a window longer than the videos makes every fold fail
    let spec = SpotterSpec::LbpChi2(SpotterConfig {
        window: 700,
        half_window: 17,
        ..SpotterConfig::default()
    });
    match run_benchmark(&m, dir.path(), &spec, &EvalConfig::default()).unwrap_err() {
        Error::Fold { subject, source } => {
            assert_eq!(subject, m.subjects()[0]);
            assert!(matches!(*source, Error::SequenceTooShort { .. }));
        }
        other => panic!("expected a fold error, got {other:?}"),
    }
}

#[test]
fn landmark_and_mdmd_runs_find_the_injected_events() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), &small(6));
    let tracks = read_landmarks(&dir.path().join(LANDMARKS_FILE)).unwrap();
    let specs = [
        SpotterSpec::Landmark {
            config: SpotterConfig::default(),
            tracks,
        },
        SpotterSpec::Mdmd(SpotterConfig::default()),
    ];
    for spec in &specs {
        let r = run_benchmark(&m, dir.path(), spec, &EvalConfig::default()).unwrap();
        let c = r.summary(Criterion::Center);
        assert!(c.prf.recall >= 0.5, "{:?}: {:?}", spec.method(), c.counts);
        for d in &r.detections {
            assert_eq!(d.length, 35);
            assert!(d.center < 600 && d.score.is_finite());
        }
    }
}

#[test]
fn supervised_closed_loop_finds_every_event() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = FixtureConfig {
        videos: 2,
        subjects: 2,
        ..small(21)
    };
    let m = fixture(dir.path(), &cfg);
    let features = StFeatureConfig::default();
    let ids: Vec<String> = m.videos.iter().map(|v| v.video_id.clone()).collect();
    let model = train_supervised(&m, dir.path(), &ids, &features, &TrainParams::default(), 5).unwrap();
    let spec = SpotterSpec::Supervised {
        features: features.clone(),
        train: TrainParams::default(),
        negatives_per_positive: 5,
    };
    let mut videos = Vec::new();
    for id in &ids {
        let dets = spot_video(&spec, &m, dir.path(), id, Some(&model)).unwrap();
        for d in &dets {
            assert!([35, 26, 18].contains(&d.length));
            assert!(d.score > 0.0);
        }
        videos.push(VideoEval {
            video_id: id.clone(),
            gts: m.ground_truth_for(id).cloned().collect(),
            dets,
        });
    }
    let (counts, _) = evaluate_videos(&videos, &EvalConfig::default()).unwrap();
    assert_eq!(counts.fn_, 0, "{counts:?}");
}
