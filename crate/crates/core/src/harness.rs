//! Leave-one-subject-out runs: fold construction, per-fold spotting (with
//! per-fold retraining for the supervised spotter), cumulative evaluation and
//! report rendering.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::metrics::{
    det_points, evaluate_videos, frame_accuracy, prf1, Criterion, DetPoint, EvalConfig, EvalCounts, Prf, VideoEval,
};
use crate::model::{
    load_frames, write_detections, DatasetManifest, DatasetStats, Detection, FrameSequence, LandmarkTrack, VideoRecord,
};
use crate::spotters::{spot_landmarks, spot_lbp_chi2, spot_mdmd, SpotterConfig};
use crate::stfeatures::{
    spot_supervised, train_linear, training_centers, window_feature, SpotterModel, StFeatureConfig, TrainParams,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub test_subject: String,
    pub train_videos: Vec<String>,
    pub test_videos: Vec<String>,
}

/// One fold per subject, in subject order; each fold tests all videos of its
/// subject and trains on the rest.
pub fn loso_folds(manifest: &DatasetManifest) -> Result<Vec<FoldSplit>> {
    let subjects = manifest.subjects();
    if subjects.len() < 2 {
        return Err(Error::Config(format!(
            "leave-one-subject-out needs at least 2 subjects, manifest has {}",
            subjects.len()
        )));
    }
    Ok(subjects
        .into_iter()
        .map(|s| {
            let (test, train): (Vec<&VideoRecord>, Vec<&VideoRecord>) =
                manifest.videos.iter().partition(|v| v.subject_id == s);
            FoldSplit {
                test_subject: s,
                train_videos: train.into_iter().map(|v| v.video_id.clone()).collect(),
                test_videos: test.into_iter().map(|v| v.video_id.clone()).collect(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    LbpChi2,
    Mdmd,
    Landmark,
    Supervised,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::LbpChi2 => "lbp-chi2",
            Method::Mdmd => "mdmd",
            Method::Landmark => "landmark",
            Method::Supervised => "supervised",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lbp-chi2" => Ok(Method::LbpChi2),
            "mdmd" => Ok(Method::Mdmd),
            "landmark" => Ok(Method::Landmark),
            "supervised" => Ok(Method::Supervised),
            other => Err(Error::Config(format!(
                "unknown method {other:?} (lbp-chi2|mdmd|landmark|supervised)"
            ))),
        }
    }
}

/// A spotter and everything it needs besides the frames.
#[derive(Debug, Clone)]
pub enum SpotterSpec {
    LbpChi2(SpotterConfig),
    Mdmd(SpotterConfig),
    Landmark {
        config: SpotterConfig,
        tracks: BTreeMap<String, LandmarkTrack>,
    },
    Supervised {
        features: StFeatureConfig,
        train: TrainParams,
        negatives_per_positive: usize,
    },
}

impl SpotterSpec {
    pub fn method(&self) -> Method {
        match self {
            SpotterSpec::LbpChi2(_) => Method::LbpChi2,
            SpotterSpec::Mdmd(_) => Method::Mdmd,
            SpotterSpec::Landmark { .. } => Method::Landmark,
            SpotterSpec::Supervised { .. } => Method::Supervised,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SpotterSpec::LbpChi2(c) | SpotterSpec::Mdmd(c) | SpotterSpec::Landmark { config: c, .. } => c.validate(),
            SpotterSpec::Supervised { features, .. } => features.validate(),
        }
    }

    fn needs_frames(&self) -> bool {
        !matches!(self, SpotterSpec::Landmark { .. })
    }

    /// Parameters that shape the output, one `key=value` per line.
    pub fn echo(&self) -> String {
        let mut out = format!("method={}\n", self.method());
        match self {
            SpotterSpec::LbpChi2(c) | SpotterSpec::Mdmd(c) | SpotterSpec::Landmark { config: c, .. } => {
                let _ = writeln!(out, "window={}", c.window);
                let _ = writeln!(out, "peak_fraction={}", c.peak_fraction);
                match self.method() {
                    Method::LbpChi2 => {
                        let _ = writeln!(out, "lbp_grid={}", c.lbp_grid);
                    }
                    Method::Mdmd => {
                        let _ = writeln!(out, "lbp_grid={}", c.lbp_grid);
                        let _ = writeln!(out, "mdmd_k={}", c.mdmd_k);
                        let _ = writeln!(out, "mdmd_bins={}", c.mdmd_bins);
                        let _ = writeln!(out, "mdmd_search_radius={}", c.mdmd_search_radius);
                    }
                    _ => {
                        let _ = writeln!(out, "landmark_window={}", c.landmark_window);
                    }
                }
            }
            SpotterSpec::Supervised {
                features: f,
                train: t,
                negatives_per_positive,
            } => {
                let scales: Vec<String> = f.scales.iter().map(|s| s.to_string()).collect();
                let _ = writeln!(out, "kind={}", f.kind);
                let _ = writeln!(out, "blocks={}x{}x{}", f.blocks.0, f.blocks.1, f.blocks.2);
                let _ = writeln!(out, "overlap={}", f.overlap);
                let _ = writeln!(out, "bins={}", f.bins);
                let _ = writeln!(out, "window={}", f.window);
                let _ = writeln!(out, "scales={}", scales.join(","));
                let _ = writeln!(out, "lambda={}", t.lambda);
                let _ = writeln!(out, "epochs={}", t.epochs);
                let _ = writeln!(out, "seed={}", t.seed);
                let _ = writeln!(out, "learning_rate={}", t.learning_rate);
                let _ = writeln!(out, "balanced={}", t.balanced);
                let _ = writeln!(out, "negatives_per_positive={negatives_per_positive}");
            }
        }
        out
    }
}

/// Where a video's frames live: `frames_path` relative to `root` unless absolute.
pub fn frames_location(root: &Path, record: &VideoRecord) -> PathBuf {
    root.join(&record.frames_path)
}

/// Loads a video's frames and checks them against its manifest record.
pub fn load_video(root: &Path, record: &VideoRecord) -> Result<FrameSequence> {
    let path = frames_location(root, record);
    let seq = load_frames(&path, &record.video_id, record.fps)?;
    if seq.len() != record.frame_count {
        return Err(Error::Validation(format!(
            "video {} has {} frames in {} but {} in the manifest",
            record.video_id,
            seq.len(),
            path.display(),
            record.frame_count
        )));
    }
    Ok(seq)
}

fn record<'a>(manifest: &'a DatasetManifest, id: &str) -> Result<&'a VideoRecord> {
    manifest
        .video(id)
        .ok_or_else(|| Error::Reference(format!("video {id} is not in the manifest")))
}

/// Fits the supervised spotter on the windows of `videos`: one positive per
/// ground-truth sample and seeded negatives away from every sample.
pub fn train_supervised(
    manifest: &DatasetManifest,
    root: &Path,
    videos: &[String],
    features: &StFeatureConfig,
    params: &TrainParams,
    negatives_per_positive: usize,
) -> Result<SpotterModel> {
    features.validate()?;
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    for id in videos {
        let rec = record(manifest, id)?;
        let index = manifest.videos.iter().position(|v| v.video_id == *id).unwrap_or(0);
        let gts: Vec<_> = manifest.ground_truth_for(id).cloned().collect();
        // the sampling stream depends on the video, not on the fold
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(index as u64);
        let centers = training_centers(rec.frame_count, &gts, features.window, negatives_per_positive, &mut rng);
        if centers.is_empty() {
            continue;
        }
        let seq = load_video(root, rec)?;
        for (c, label) in centers {
            samples.push(window_feature(&seq, c, features)?);
            labels.push(label);
        }
    }
    let (linear, _) = train_linear(&samples, &labels, params)?;
    Ok(SpotterModel {
        feature: features.clone(),
        linear,
    })
}

/// Runs an unsupervised spotter, or the supervised one with `model`, on one video.
pub fn spot_video(
    spec: &SpotterSpec,
    manifest: &DatasetManifest,
    root: &Path,
    video_id: &str,
    model: Option<&SpotterModel>,
) -> Result<Vec<Detection>> {
    let rec = record(manifest, video_id)?;
    match spec {
        SpotterSpec::LbpChi2(c) => spot_lbp_chi2(&load_video(root, rec)?, c),
        SpotterSpec::Mdmd(c) => spot_mdmd(&load_video(root, rec)?, c),
        SpotterSpec::Landmark { config, tracks } => {
            let track = tracks
                .get(video_id)
                .ok_or_else(|| Error::Coverage(format!("no landmark track for video {video_id}")))?;
            spot_landmarks(track, rec.frame_count, config)
        }
        SpotterSpec::Supervised { features, .. } => {
            let model = model.ok_or_else(|| Error::Argument("the supervised spotter needs a trained model".into()))?;
            spot_supervised(&load_video(root, rec)?, model, features)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldReport {
    pub test_subject: String,
    pub test_videos: Vec<String>,
    pub center: EvalCounts,
    pub iou: EvalCounts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionSummary {
    pub criterion: Criterion,
    pub counts: EvalCounts,
    pub prf: Prf,
    /// `None` when there are no true positives.
    pub frame_f: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub version: String,
    pub method: String,
    pub eval: EvalConfig,
    pub config_echo: String,
    pub stats: DatasetStats,
    pub folds: Vec<FoldReport>,
    /// Center criterion first, then IoU.
    pub overall: Vec<CriterionSummary>,
    /// DET sweep under `eval.criterion`.
    pub det: Vec<DetPoint>,
    pub detections: Vec<Detection>,
}

impl BenchmarkReport {
    pub fn summary(&self, criterion: Criterion) -> &CriterionSummary {
        self.overall
            .iter()
            .find(|s| s.criterion == criterion)
            .expect("both criteria are summarized")
    }
}

fn stats_of(manifest: &DatasetManifest, videos: &BTreeSet<&str>) -> DatasetStats {
    DatasetStats {
        videos: videos.len(),
        subjects: manifest
            .videos
            .iter()
            .filter(|v| videos.contains(v.video_id.as_str()))
            .map(|v| v.subject_id.as_str())
            .collect::<BTreeSet<_>>()
            .len(),
        samples: manifest
            .ground_truth
            .iter()
            .filter(|g| videos.contains(g.video_id.as_str()))
            .count(),
    }
}

/// Runs the given folds. Frame storage (or landmark coverage) is checked for
/// every test and train video before any spotting; the first failing fold
/// aborts the run.
pub fn run_folds(
    manifest: &DatasetManifest,
    root: &Path,
    folds: &[FoldSplit],
    spec: &SpotterSpec,
    eval: &EvalConfig,
) -> Result<BenchmarkReport> {
    spec.validate()?;
    eval.validate()?;
    let mut tested = BTreeSet::new();
    for fold in folds {
        for id in &fold.test_videos {
            if !tested.insert(id.as_str()) {
                return Err(Error::Config(format!("video {id} is tested by more than one fold")));
            }
        }
        for id in fold.train_videos.iter().chain(&fold.test_videos) {
            let rec = record(manifest, id)?;
            if spec.needs_frames() {
                let path = frames_location(root, rec);
                if !path.exists() {
                    return Err(Error::io(
                        path,
                        std::io::Error::new(
                            std::io::ErrorKind::NotFound,
                            format!("frame storage for video {id} not found"),
                        ),
                    ));
                }
            }
            if let SpotterSpec::Landmark { tracks, .. } = spec {
                if fold.test_videos.contains(id) && !tracks.contains_key(id.as_str()) {
                    return Err(Error::Coverage(format!("no landmark track for video {id}")));
                }
            }
        }
    }

    let mut evaluated: Vec<(String, Vec<VideoEval>)> = Vec::with_capacity(folds.len());
    for fold in folds {
        let run = || -> Result<Vec<VideoEval>> {
            let model = match spec {
                SpotterSpec::Supervised {
                    features,
                    train,
                    negatives_per_positive,
                } => Some(train_supervised(
                    manifest,
                    root,
                    &fold.train_videos,
                    features,
                    train,
                    *negatives_per_positive,
                )?),
                _ => None,
            };
            fold.test_videos
                .iter()
                .map(|id| {
                    Ok(VideoEval {
                        video_id: id.clone(),
                        gts: manifest.ground_truth_for(id).cloned().collect(),
                        dets: spot_video(spec, manifest, root, id, model.as_ref())?,
                    })
                })
                .collect()
        };
        let videos = run().map_err(|e| Error::Fold {
            subject: fold.test_subject.clone(),
            source: Box::new(e),
        })?;
        evaluated.push((fold.test_subject.clone(), videos));
    }
    assemble(manifest, evaluated, eval, spec.method().to_string(), spec.echo())
}

/// Builds the report from per-fold evaluated videos.
fn assemble(
    manifest: &DatasetManifest,
    evaluated: Vec<(String, Vec<VideoEval>)>,
    eval: &EvalConfig,
    method: String,
    config_echo: String,
) -> Result<BenchmarkReport> {
    let mut folds = Vec::with_capacity(evaluated.len());
    for (subject, videos) in &evaluated {
        let (center, _) = evaluate_videos(videos, &eval_for(eval, Criterion::Center))?;
        let (iou, _) = evaluate_videos(videos, &eval_for(eval, Criterion::Iou))?;
        folds.push(FoldReport {
            test_subject: subject.clone(),
            test_videos: videos.iter().map(|v| v.video_id.clone()).collect(),
            center,
            iou,
        });
    }
    let tested: BTreeSet<&str> = evaluated
        .iter()
        .flat_map(|(_, vs)| vs.iter().map(|v| v.video_id.as_str()))
        .collect();
    let stats = stats_of(manifest, &tested);
    let per_fold: Vec<Vec<VideoEval>> = evaluated.iter().map(|(_, v)| v.clone()).collect();
    let all: Vec<VideoEval> = per_fold.iter().flatten().cloned().collect();

    let mut overall = Vec::with_capacity(2);
    for criterion in [Criterion::Center, Criterion::Iou] {
        let (counts, pairs) = evaluate_videos(&all, &eval_for(eval, criterion))?;
        let frame_f = if pairs.is_empty() {
            None
        } else {
            Some(frame_accuracy(&pairs, eval.apex_mode)?)
        };
        overall.push(CriterionSummary {
            criterion,
            counts,
            prf: prf1(counts),
            frame_f,
        });
    }
    let det = if stats.videos > 0 && stats.samples > 0 {
        det_points(&per_fold, &stats, None, eval)?
    } else {
        Vec::new()
    };
    Ok(BenchmarkReport {
        version: crate::VERSION.to_string(),
        method,
        eval: *eval,
        config_echo,
        stats,
        folds,
        overall,
        det,
        detections: all.into_iter().flat_map(|v| v.dets).collect(),
    })
}

/// Report for an existing set of detections, with one fold per subject (no
/// training involved). Every manifest video is evaluated; videos without
/// detections count their samples as misses.
pub fn report_from_detections(
    manifest: &DatasetManifest,
    detections: &[Detection],
    eval: &EvalConfig,
    label: &str,
) -> Result<BenchmarkReport> {
    eval.validate()?;
    for d in detections {
        record(manifest, &d.video_id)?;
    }
    let evaluated = manifest
        .subjects()
        .into_iter()
        .map(|s| {
            let videos = manifest
                .videos
                .iter()
                .filter(|v| v.subject_id == s)
                .map(|v| VideoEval {
                    video_id: v.video_id.clone(),
                    gts: manifest.ground_truth_for(&v.video_id).cloned().collect(),
                    dets: detections
                        .iter()
                        .filter(|d| d.video_id == v.video_id)
                        .cloned()
                        .collect(),
                })
                .collect();
            (s, videos)
        })
        .collect();
    assemble(
        manifest,
        evaluated,
        eval,
        label.to_string(),
        format!("method={label}\n"),
    )
}

fn eval_for(eval: &EvalConfig, criterion: Criterion) -> EvalConfig {
    EvalConfig { criterion, ..*eval }
}

/// Full leave-one-subject-out benchmark.
pub fn run_benchmark(
    manifest: &DatasetManifest,
    root: &Path,
    spec: &SpotterSpec,
    eval: &EvalConfig,
) -> Result<BenchmarkReport> {
    run_folds(manifest, root, &loso_folds(manifest)?, spec, eval)
}

pub const SUMMARY_FILE: &str = "summary.txt";
pub const METRICS_FILE: &str = "metrics.csv";
pub const DET_FILE: &str = "det.csv";
pub const DETECTIONS_FILE: &str = "detections.csv";

pub fn format_metrics_csv(report: &BenchmarkReport) -> String {
    let mut out = String::from("criterion,TP,FP,FN,precision,recall,f1,frame_F\n");
    for s in &report.overall {
        let f = s.frame_f.map_or_else(|| "NA".to_string(), |v| v.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.criterion, s.counts.tp, s.counts.fp, s.counts.fn_, s.prf.precision, s.prf.recall, s.prf.f1, f
        );
    }
    out
}

/// Rows by descending threshold, the leading `inf` row included.
pub fn format_det_csv(points: &[DetPoint]) -> String {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| b.threshold.total_cmp(&a.threshold));
    let mut out = String::from("threshold,fppv,miss_rate\n");
    for p in &sorted {
        let _ = writeln!(out, "{},{},{}", p.threshold, p.fppv, p.miss_rate);
    }
    out
}

pub fn format_summary(report: &BenchmarkReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mespot {} benchmark report", report.version);
    let _ = writeln!(out, "method: {}", report.method);
    let _ = writeln!(
        out,
        "evaluation: criterion={} epsilon={} apex_mode={}",
        report.eval.criterion, report.eval.epsilon, report.eval.apex_mode
    );
    let _ = writeln!(
        out,
        "data: V={} S={} N_plus={}",
        report.stats.videos, report.stats.subjects, report.stats.samples
    );
    let _ = writeln!(out, "\nfolds (TP/FP/FN center | iou):");
    for f in &report.folds {
        let _ = writeln!(
            out,
            "  {:<12} {:>3} videos  {}/{}/{} | {}/{}/{}",
            f.test_subject,
            f.test_videos.len(),
            f.center.tp,
            f.center.fp,
            f.center.fn_,
            f.iou.tp,
            f.iou.fp,
            f.iou.fn_
        );
    }
    let _ = writeln!(out, "\noverall:");
    for s in &report.overall {
        let frame = s.frame_f.map_or_else(|| "NA".to_string(), |v| format!("{v:.4}"));
        let _ = writeln!(
            out,
            "  {:<6} TP={} FP={} FN={}  P={:.4} R={:.4} F1={:.4}  frame_F={}",
            s.criterion, s.counts.tp, s.counts.fp, s.counts.fn_, s.prf.precision, s.prf.recall, s.prf.f1, frame
        );
    }
    let _ = writeln!(out, "\nDET points: {}", report.det.len());
    let _ = writeln!(out, "\nconfiguration:");
    for line in report.config_echo.lines() {
        let _ = writeln!(out, "  {line}");
    }
    out
}

/// Writes the summary, metrics CSV, DET CSV and the detections into `dir`,
/// each file atomically. Returns the written paths.
pub fn render_report(report: &BenchmarkReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [
        (SUMMARY_FILE, format_summary(report)),
        (METRICS_FILE, format_metrics_csv(report)),
        (DET_FILE, format_det_csv(&report.det)),
    ];
    let mut written = Vec::new();
    for (name, text) in files {
        let path = dir.join(name);
        write_atomic(&path, text.as_bytes())?;
        written.push(path);
    }
    let path = dir.join(DETECTIONS_FILE);
    write_detections(&path, &report.detections)?;
    written.push(path);
    Ok(written)
}
