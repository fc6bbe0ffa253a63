//! Manifest and detection file formats.
//!
//! Manifest layout (UTF-8, `#` starts a comment line):
//!
//! ```text
//! [videos]
//! video_id,subject_id,frame_count,fps,frames_path
//! [ground_truth]
//! video_id,onset,offset
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{DatasetManifest, Detection, GroundTruthSample, VideoRecord};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

pub const DETECTIONS_HEADER: [&str; 4] = ["video_id", "center", "length", "score"];

const VIDEO_COLUMNS: &str = "video_id,subject_id,frame_count,fps,frames_path";
const GT_COLUMNS: &str = "video_id,onset,offset";

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Videos,
    GroundTruth,
}

pub fn parse_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_manifest_str(&text, path)
}

/// Parses manifest text; `origin` is only used in error messages.
pub fn read_manifest_str(text: &str, origin: &Path) -> Result<DatasetManifest> {
    let mut section = Section::None;
    let mut videos = Vec::new();
    let mut gts = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line {
            "[videos]" => {
                section = Section::Videos;
                continue;
            }
            "[ground_truth]" => {
                section = Section::GroundTruth;
                continue;
            }
            _ if line.starts_with('[') => {
                return Err(Error::parse(origin, lineno, format!("unknown section {line}")));
            }
            _ => {}
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match section {
            Section::None => {
                return Err(Error::parse(origin, lineno, "row outside of any section"));
            }
            Section::Videos => {
                if line == VIDEO_COLUMNS {
                    continue;
                }
                if fields.len() != 5 {
                    return Err(Error::parse(
                        origin,
                        lineno,
                        format!("expected 5 fields ({VIDEO_COLUMNS}), found {}", fields.len()),
                    ));
                }
                let frame_count = fields[2]
                    .parse::<usize>()
                    .map_err(|e| Error::parse(origin, lineno, format!("frame_count: {e}")))?;
                let fps = fields[3]
                    .parse::<f64>()
                    .map_err(|e| Error::parse(origin, lineno, format!("fps: {e}")))?;
                videos.push(VideoRecord {
                    video_id: fields[0].to_string(),
                    subject_id: fields[1].to_string(),
                    frame_count,
                    fps,
                    frames_path: fields[4].to_string(),
                });
            }
            Section::GroundTruth => {
                if line == GT_COLUMNS {
                    continue;
                }
                if fields.len() != 3 {
                    return Err(Error::parse(
                        origin,
                        lineno,
                        format!("expected 3 fields ({GT_COLUMNS}), found {}", fields.len()),
                    ));
                }
                let onset = fields[1]
                    .parse::<usize>()
                    .map_err(|e| Error::parse(origin, lineno, format!("onset: {e}")))?;
                let offset = fields[2]
                    .parse::<usize>()
                    .map_err(|e| Error::parse(origin, lineno, format!("offset: {e}")))?;
                if offset < onset {
                    return Err(Error::Validation(format!(
                        "line {lineno}: offset {offset} precedes onset {onset}"
                    )));
                }
                gts.push(GroundTruthSample {
                    video_id: fields[0].to_string(),
                    subject_id: String::new(),
                    onset,
                    offset,
                });
            }
        }
    }
    DatasetManifest::new(videos, gts)
}

/// Canonical text form of a manifest.
pub fn format_manifest(m: &DatasetManifest) -> String {
    let mut out = String::new();
    out.push_str("# mespot manifest: 0-based inclusive frame indices\n");
    out.push_str("[videos]\n");
    out.push_str(VIDEO_COLUMNS);
    out.push('\n');
    for v in &m.videos {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            v.video_id, v.subject_id, v.frame_count, v.fps, v.frames_path
        );
    }
    out.push_str("[ground_truth]\n");
    out.push_str(GT_COLUMNS);
    out.push('\n');
    for g in &m.ground_truth {
        let _ = writeln!(out, "{},{},{}", g.video_id, g.onset, g.offset);
    }
    out
}

pub fn write_manifest(path: &Path, m: &DatasetManifest) -> Result<()> {
    write_atomic(path, format_manifest(m).as_bytes())
}

/// Reads a detections CSV. Rows are returned grouped by video in manifest
/// order, keeping file order within a video.
pub fn parse_detections(path: &Path, manifest: &DatasetManifest) -> Result<Vec<Detection>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(file);

    let mut out: Vec<(usize, Detection)> = Vec::new();
    let mut seen_header = false;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(path, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if !seen_header {
            seen_header = true;
            if record.iter().eq(DETECTIONS_HEADER.iter().copied()) {
                continue;
            }
            return Err(Error::parse(
                path,
                line,
                format!("expected header {}", DETECTIONS_HEADER.join(",")),
            ));
        }
        if record.len() != 4 {
            return Err(Error::parse(
                path,
                line,
                format!("expected 4 fields, found {}", record.len()),
            ));
        }
        let video_id = &record[0];
        let center: usize = record[1]
            .parse()
            .map_err(|e| Error::parse(path, line, format!("center: {e}")))?;
        let length: usize = record[2]
            .parse()
            .map_err(|e| Error::parse(path, line, format!("length: {e}")))?;
        let score: f64 = record[3]
            .parse()
            .map_err(|e| Error::parse(path, line, format!("score: {e}")))?;
        if !score.is_finite() {
            return Err(Error::parse(path, line, format!("score {score} is not finite")));
        }
        if length == 0 {
            return Err(Error::parse(path, line, "length must be at least 1"));
        }
        let order = manifest
            .videos
            .iter()
            .position(|v| v.video_id == video_id)
            .ok_or_else(|| Error::Reference(format!("line {line}: unknown video {video_id}")))?;
        let frames = manifest.videos[order].frame_count;
        if center >= frames {
            return Err(Error::Validation(format!(
                "line {line}: center {center} outside the {frames} frames of {video_id}"
            )));
        }
        out.push((
            order,
            Detection {
                video_id: video_id.to_string(),
                center,
                length,
                score,
            },
        ));
    }
    out.sort_by_key(|(order, _)| *order);
    Ok(out.into_iter().map(|(_, d)| d).collect())
}

pub fn write_detections(path: &Path, dets: &[Detection]) -> Result<()> {
    let mut out = DETECTIONS_HEADER.join(",");
    out.push('\n');
    for d in dets {
        let _ = writeln!(out, "{},{},{},{}", d.video_id, d.center, d.length, d.score);
    }
    write_atomic(path, out.as_bytes())
}
