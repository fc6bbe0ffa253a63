//! The `mespot` command line. Every subcommand is a thin composition of
//! library calls; exit status 0 on success, 1 on a domain error, 2 on a
//! usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::harness::{
    format_det_csv, format_metrics_csv, format_summary, render_report, report_from_detections, run_benchmark,
    spot_video, train_supervised, Method, SpotterSpec,
};
use crate::metrics::{det_points, evaluate_videos, frame_accuracy, prf1, Criterion, EvalConfig, VideoEval};
use crate::model::{parse_detections, parse_manifest, read_landmarks, write_detections, DatasetManifest, Detection};
use crate::stfeatures::{read_model, write_model};
use crate::synth::write_fixture;

#[derive(Debug, Parser)]
#[command(name = "mespot", version, about = "Micro-expression spotting benchmark toolkit")]
struct Cli {
    /// Configuration file (flat key=value with [sections]).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a configuration key, e.g. --set spotter.window=41. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Seed for fixture generation and classifier training.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long, value_parser = ["center", "iou"])]
    criterion: Option<String>,
    /// IoU threshold for the iou criterion.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Drop the length term from frame-based accuracy.
    #[arg(long)]
    apex_mode: bool,
}

#[derive(Debug, Args)]
struct SpotterArgs {
    #[arg(long, value_parser = ["lbp-chi2", "mdmd", "landmark", "supervised"], default_value = "lbp-chi2")]
    method: String,
    /// Landmark CSV (`video_id,frame,point_index,x,y`), for the landmark method.
    #[arg(long)]
    landmarks: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic fixture (manifest, raw frames, landmarks, distractor log).
    Synth {
        #[arg(long)]
        out: PathBuf,
    },
    /// Spot micro-expressions and write a detections CSV.
    Spot {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        spotter: SpotterArgs,
        /// Trained model file, for the supervised method.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Restrict to these videos (default: all). Repeatable.
        #[arg(long = "video")]
        videos: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the supervised spotter on every video of a manifest.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Match a detections file against the ground truth.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        detections: PathBuf,
        #[command(flatten)]
        eval: EvalArgs,
        /// Also write the metrics CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// DET points (threshold, FPPV, miss rate) for a detections file.
    Det {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        detections: PathBuf,
        #[command(flatten)]
        eval: EvalArgs,
        /// DET CSV destination (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Leave-one-subject-out benchmark; writes the report files into --out.
    Loso {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        spotter: SpotterArgs,
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render the report files for an existing detections file.
    Report {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        detections: PathBuf,
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit status.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if cli.command.is_none() && !cli.print_config {
        let _ = Cli::command()
            .error(ErrorKind::MissingSubcommand, "a subcommand is required")
            .print();
        return 2;
    }
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            1
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<Config> {
    let mut cfg = Config::resolve(cli.config.as_deref(), &cli.overrides)?;
    if let Some(seed) = cli.seed {
        cfg.synth.seed = seed;
        cfg.train.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn eval_config(cfg: &Config, args: &EvalArgs) -> Result<EvalConfig> {
    let mut eval = cfg.eval;
    if let Some(c) = &args.criterion {
        eval.criterion = c.parse::<Criterion>()?;
    }
    if let Some(e) = args.epsilon {
        eval.epsilon = e;
    }
    eval.apex_mode |= args.apex_mode;
    eval.validate()?;
    Ok(eval)
}

fn spotter_spec(cfg: &Config, args: &SpotterArgs) -> Result<SpotterSpec> {
    Ok(match args.method.parse::<Method>()? {
        Method::LbpChi2 => SpotterSpec::LbpChi2(cfg.spotter.clone()),
        Method::Mdmd => SpotterSpec::Mdmd(cfg.spotter.clone()),
        Method::Landmark => {
            let path = args
                .landmarks
                .as_deref()
                .ok_or_else(|| Error::Argument("--method landmark needs --landmarks <csv>".into()))?;
            SpotterSpec::Landmark {
                config: cfg.spotter.clone(),
                tracks: read_landmarks(path)?,
            }
        }
        Method::Supervised => SpotterSpec::Supervised {
            features: cfg.stfeatures.clone(),
            train: cfg.train.clone(),
            negatives_per_positive: cfg.negatives_per_positive,
        },
    })
}

fn manifest_root(manifest: &Path) -> PathBuf {
    match manifest.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<R> + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(f)
}

fn group_by_video(manifest: &DatasetManifest, dets: &[Detection]) -> Vec<VideoEval> {
    manifest
        .videos
        .iter()
        .map(|v| VideoEval {
            video_id: v.video_id.clone(),
            gts: manifest.ground_truth_for(&v.video_id).cloned().collect(),
            dets: dets.iter().filter(|d| d.video_id == v.video_id).cloned().collect(),
        })
        .collect()
}

fn execute(cli: Cli) -> Result<()> {
    let cfg = resolve_config(&cli)?;
    if cli.print_config {
        print!("{}", cfg.to_text());
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Ok(());
    };
    match command {
        Command::Synth { out } => {
            let plan = with_workers(cli.workers, || write_fixture(&cfg.synth, &out))?;
            let s = plan.manifest.stats;
            println!(
                "wrote {}: V={} S={} N_plus={} distractors={}",
                out.display(),
                s.videos,
                s.subjects,
                s.samples,
                plan.videos.iter().map(|v| v.distractors.len()).sum::<usize>()
            );
        }
        Command::Spot {
            manifest,
            spotter,
            model,
            videos,
            out,
        } => {
            let m = parse_manifest(&manifest)?;
            let root = manifest_root(&manifest);
            let spec = spotter_spec(&cfg, &spotter)?;
            let model = match (&spec, model) {
                (SpotterSpec::Supervised { .. }, Some(p)) => Some(read_model(&p)?),
                (SpotterSpec::Supervised { .. }, None) => {
                    return Err(Error::Argument("--method supervised needs --model <file>".into()));
                }
                _ => None,
            };
            let spec = match (spec, &model) {
                (
                    SpotterSpec::Supervised {
                        train,
                        negatives_per_positive,
                        ..
                    },
                    Some(model),
                ) => SpotterSpec::Supervised {
                    features: model.feature.clone(),
                    train,
                    negatives_per_positive,
                },
                (s, _) => s,
            };
            let ids: Vec<String> = if videos.is_empty() {
                m.videos.iter().map(|v| v.video_id.clone()).collect()
            } else {
                videos
            };
            let dets = with_workers(cli.workers, || {
                let mut all = Vec::new();
                for id in &ids {
                    all.extend(spot_video(&spec, &m, &root, id, model.as_ref())?);
                }
                Ok(all)
            })?;
            write_detections(&out, &dets)?;
            println!("{} detections in {} videos -> {}", dets.len(), ids.len(), out.display());
        }
        Command::Train { manifest, out } => {
            let m = parse_manifest(&manifest)?;
            let root = manifest_root(&manifest);
            let ids: Vec<String> = m.videos.iter().map(|v| v.video_id.clone()).collect();
            let model = with_workers(cli.workers, || {
                train_supervised(&m, &root, &ids, &cfg.stfeatures, &cfg.train, cfg.negatives_per_positive)
            })?;
            write_model(&out, &model)?;
            println!("trained {} weights -> {}", model.linear.weights.len(), out.display());
        }
        Command::Eval {
            manifest,
            detections,
            eval,
            out,
        } => {
            let m = parse_manifest(&manifest)?;
            let eval = eval_config(&cfg, &eval)?;
            let dets = parse_detections(&detections, &m)?;
            let videos = group_by_video(&m, &dets);
            let (counts, pairs) = evaluate_videos(&videos, &eval)?;
            let p = prf1(counts);
            let frame_f = if pairs.is_empty() {
                "NA".to_string()
            } else {
                frame_accuracy(&pairs, eval.apex_mode)?.to_string()
            };
            println!(
                "criterion={} TP={} FP={} FN={} precision={} recall={} f1={} frame_F={}",
                eval.criterion, counts.tp, counts.fp, counts.fn_, p.precision, p.recall, p.f1, frame_f
            );
            if let Some(out) = out {
                let report = report_from_detections(&m, &dets, &eval, "detections")?;
                let csv = format_metrics_csv(&report);
                let header = csv.lines().next().unwrap_or_default();
                let row = csv
                    .lines()
                    .find(|l| l.starts_with(&format!("{},", eval.criterion)))
                    .unwrap_or_default();
                write_atomic(&out, format!("{header}\n{row}\n").as_bytes())?;
            }
        }
        Command::Det {
            manifest,
            detections,
            eval,
            out,
        } => {
            let m = parse_manifest(&manifest)?;
            let eval = eval_config(&cfg, &eval)?;
            let dets = parse_detections(&detections, &m)?;
            let points = det_points(&[group_by_video(&m, &dets)], &m.stats, None, &eval)?;
            let csv = format_det_csv(&points);
            match out {
                Some(out) => {
                    write_atomic(&out, csv.as_bytes())?;
                    println!("{} DET points -> {}", points.len(), out.display());
                }
                None => print!("{csv}"),
            }
        }
        Command::Loso {
            manifest,
            spotter,
            eval,
            out,
        } => {
            let m = parse_manifest(&manifest)?;
            let root = manifest_root(&manifest);
            let eval = eval_config(&cfg, &eval)?;
            let spec = spotter_spec(&cfg, &spotter)?;
            let report = with_workers(cli.workers, || run_benchmark(&m, &root, &spec, &eval))?;
            render_report(&report, &out)?;
            print!("{}", format_summary(&report));
        }
        Command::Report {
            manifest,
            detections,
            eval,
            out,
        } => {
            let m = parse_manifest(&manifest)?;
            let eval = eval_config(&cfg, &eval)?;
            let dets = parse_detections(&detections, &m)?;
            let report = report_from_detections(&m, &dets, &eval, "detections")?;
            render_report(&report, &out)?;
            print!("{}", format_summary(&report));
        }
    }
    Ok(())
}
