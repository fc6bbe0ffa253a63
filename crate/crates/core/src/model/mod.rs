//! Domain types shared by every stage of the toolkit.
//!
//! Frame indices are 0-based and intervals are inclusive on both ends.

mod align;
mod frames;
mod interval;
mod landmarks;
mod manifest;

pub use align::{align_frames, AlignmentTemplate, Similarity, DEFAULT_REFRESH_EVERY};
pub use frames::{load_frames, read_frame_dir, read_raw, write_frame_dir, write_raw, FrameSequence, RAW_MAGIC};
pub use interval::{interval_conversion, interval_inverse, Interval};
pub use landmarks::{face68, read_landmarks, write_landmarks, LandmarkTrack, Point};
pub use manifest::{
    format_manifest, parse_detections, parse_manifest, read_manifest_str, write_detections, write_manifest,
    DETECTIONS_HEADER,
};

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// One annotated micro-expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundTruthSample {
    pub video_id: String,
    pub subject_id: String,
    pub onset: usize,
    pub offset: usize,
}

impl GroundTruthSample {
    pub fn new(
        video_id: impl Into<String>,
        subject_id: impl Into<String>,
        onset: usize,
        offset: usize,
    ) -> Result<Self> {
        if offset < onset {
            return Err(Error::Validation(format!(
                "ground truth offset {offset} precedes onset {onset}"
            )));
        }
        Ok(GroundTruthSample {
            video_id: video_id.into(),
            subject_id: subject_id.into(),
            onset,
            offset,
        })
    }

    pub fn center(&self) -> usize {
        (self.onset + self.offset) / 2
    }

    pub fn length(&self) -> usize {
        self.offset - self.onset + 1
    }

    pub fn interval(&self) -> Interval {
        Interval {
            onset: self.onset as i64,
            offset: self.offset as i64,
        }
    }
}

/// One spotted window.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub video_id: String,
    pub center: usize,
    pub length: usize,
    pub score: f64,
}

impl Detection {
    pub fn new(video_id: impl Into<String>, center: usize, length: usize, score: f64) -> Result<Self> {
        if length == 0 {
            return Err(Error::Argument("detection length must be at least 1".into()));
        }
        if !score.is_finite() {
            return Err(Error::Argument(format!("detection score {score} is not finite")));
        }
        Ok(Detection {
            video_id: video_id.into(),
            center,
            length,
            score,
        })
    }

    pub fn interval(&self) -> Interval {
        Interval::from_center(self.center as i64, self.length as i64).expect("detection length is at least 1")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoRecord {
    pub video_id: String,
    pub subject_id: String,
    pub frame_count: usize,
    pub fps: f64,
    /// Frame storage, relative to the manifest's directory unless absolute.
    pub frames_path: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetStats {
    pub videos: usize,
    pub subjects: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub videos: Vec<VideoRecord>,
    pub ground_truth: Vec<GroundTruthSample>,
    pub stats: DatasetStats,
}

fn check_id(kind: &str, id: &str) -> Result<()> {
    if id.is_empty() {
        return Err(Error::Validation(format!("{kind} must be non-empty")));
    }
    if id.contains(',') || id.contains('\n') || id.trim() != id {
        return Err(Error::Validation(format!(
            "{kind} {id:?} contains a comma, newline or surrounding whitespace"
        )));
    }
    Ok(())
}

impl DatasetManifest {
    /// Validates the records and recomputes the stats from them.
    pub fn new(videos: Vec<VideoRecord>, ground_truth: Vec<GroundTruthSample>) -> Result<Self> {
        if videos.is_empty() {
            return Err(Error::Validation("manifest lists no videos".into()));
        }
        let mut ids = BTreeSet::new();
        for v in &videos {
            check_id("video id", &v.video_id)?;
            check_id("subject id", &v.subject_id)?;
            if v.frame_count == 0 {
                return Err(Error::Validation(format!("video {} has no frames", v.video_id)));
            }
            if !(v.fps.is_finite() && v.fps > 0.0) {
                return Err(Error::Validation(format!("video {} has fps {}", v.video_id, v.fps)));
            }
            if !ids.insert(v.video_id.as_str()) {
                return Err(Error::Validation(format!("duplicate video id {}", v.video_id)));
            }
        }
        let mut ground_truth = ground_truth;
        for gt in &mut ground_truth {
            let video = videos
                .iter()
                .find(|v| v.video_id == gt.video_id)
                .ok_or_else(|| Error::Reference(format!("ground truth names unknown video {}", gt.video_id)))?;
            if gt.offset < gt.onset {
                return Err(Error::Validation(format!(
                    "ground truth [{}, {}] in {} is reversed",
                    gt.onset, gt.offset, gt.video_id
                )));
            }
            if gt.offset >= video.frame_count {
                return Err(Error::Validation(format!(
                    "ground truth [{}, {}] exceeds the {} frames of {}",
                    gt.onset, gt.offset, video.frame_count, gt.video_id
                )));
            }
            gt.subject_id.clone_from(&video.subject_id);
        }
        let subjects = videos
            .iter()
            .map(|v| v.subject_id.as_str())
            .collect::<BTreeSet<_>>()
            .len();
        let stats = DatasetStats {
            videos: videos.len(),
            subjects,
            samples: ground_truth.len(),
        };
        Ok(DatasetManifest {
            videos,
            ground_truth,
            stats,
        })
    }

    pub fn video(&self, video_id: &str) -> Option<&VideoRecord> {
        self.videos.iter().find(|v| v.video_id == video_id)
    }

    pub fn ground_truth_for<'a>(&'a self, video_id: &'a str) -> impl Iterator<Item = &'a GroundTruthSample> + 'a {
        self.ground_truth.iter().filter(move |g| g.video_id == video_id)
    }

    /// Sorted, de-duplicated subject ids.
    pub fn subjects(&self) -> Vec<String> {
        self.videos
            .iter()
            .map(|v| v.subject_id.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn record(id: &str, subject: &str, frames: usize) -> VideoRecord {
        VideoRecord {
            video_id: id.into(),
            subject_id: subject.into(),
            frame_count: frames,
            fps: 100.0,
            frames_path: format!("frames/{id}.mesq"),
        }
    }

    #[test]
    fn stats_are_counted_from_contents() {
        let m = DatasetManifest::new(
            vec![record("v1", "s1", 300), record("v2", "s2", 300)],
            vec![
                GroundTruthSample::new("v1", "", 10, 40).unwrap(),
                GroundTruthSample::new("v1", "", 100, 120).unwrap(),
                GroundTruthSample::new("v2", "", 50, 60).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(
            m.stats,
            DatasetStats {
                videos: 2,
                subjects: 2,
                samples: 3
            }
        );
        assert_eq!(m.ground_truth[2].subject_id, "s2");
    }

    #[test]
    fn interval_past_end_is_rejected() {
        let err = DatasetManifest::new(
            vec![record("v1", "s1", 100)],
            vec![GroundTruthSample {
                video_id: "v1".into(),
                subject_id: "s1".into(),
                onset: 90,
                offset: 100,
            }],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn duplicate_and_unknown_ids() {
        assert!(DatasetManifest::new(vec![record("v1", "s1", 10), record("v1", "s2", 10)], vec![]).is_err());
        let err = DatasetManifest::new(
            vec![record("v1", "s1", 10)],
            vec![GroundTruthSample::new("v9", "", 1, 2).unwrap()],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Reference(_)));
    }

    #[test]
    fn ground_truth_center_and_length() {
        let g = GroundTruthSample::new("v", "s", 100, 134).unwrap();
        assert_eq!((g.center(), g.length()), (117, 35));
        assert!(GroundTruthSample::new("v", "s", 5, 4).is_err());
    }
}
