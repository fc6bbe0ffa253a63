//! Grayscale frame sequences and their on-disk storage.
//!
//! Two layouts are supported: a directory of `frame_000000.png` ... files, or
//! a single raw file holding a 16-byte header (`MESQ`, then width, height and
//! frame count as little-endian `u32`) followed by row-major 8-bit frames.

use std::io::{BufWriter, Read, Write};
use std::path::Path;

use image::GrayImage;

use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

pub const RAW_MAGIC: &[u8; 4] = b"MESQ";

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub video_id: String,
    pub width: u32,
    pub height: u32,
    pub fps: f64,
    pub frames: Vec<GrayImage>,
}

impl FrameSequence {
    pub fn new(video_id: impl Into<String>, fps: f64, frames: Vec<GrayImage>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::Argument("a frame sequence needs at least one frame".into()))?;
        let (width, height) = first.dimensions();
        if width == 0 || height == 0 {
            return Err(Error::Argument("frames must have non-zero size".into()));
        }
        if let Some(i) = frames.iter().position(|f| f.dimensions() != (width, height)) {
            return Err(Error::Argument(format!(
                "frame {i} is {:?}, expected {width}x{height}",
                frames[i].dimensions()
            )));
        }
        Ok(FrameSequence {
            video_id: video_id.into(),
            width,
            height,
            fps,
            frames,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

pub fn write_raw(path: &Path, seq: &FrameSequence) -> Result<()> {
    let frame_bytes = (seq.width * seq.height) as usize;
    let mut buf = Vec::with_capacity(16 + frame_bytes * seq.len());
    buf.extend_from_slice(RAW_MAGIC);
    buf.extend_from_slice(&seq.width.to_le_bytes());
    buf.extend_from_slice(&seq.height.to_le_bytes());
    buf.extend_from_slice(&(seq.len() as u32).to_le_bytes());
    for f in &seq.frames {
        buf.extend_from_slice(f.as_raw());
    }
    write_atomic(path, &buf)
}

pub fn read_raw(path: &Path, video_id: &str, fps: f64) -> Result<FrameSequence> {
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut header = [0u8; 16];
    file.read_exact(&mut header).map_err(|e| Error::io(path, e))?;
    if &header[0..4] != RAW_MAGIC {
        return Err(Error::parse(path, 0, "missing MESQ magic"));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
    let (width, height, count) = (word(4), word(8), word(12) as usize);
    let frame_bytes = width as usize * height as usize;
    let mut data = Vec::new();
    file.read_to_end(&mut data).map_err(|e| Error::io(path, e))?;
    if data.len() != frame_bytes * count {
        return Err(Error::parse(
            path,
            0,
            format!(
                "payload is {} bytes, header implies {count} frames of {width}x{height}",
                data.len()
            ),
        ));
    }
    let frames = data
        .chunks_exact(frame_bytes.max(1))
        .take(count)
        .map(|c| GrayImage::from_raw(width, height, c.to_vec()).expect("chunk has frame size"))
        .collect();
    FrameSequence::new(video_id, fps, frames)
}

fn frame_name(i: usize) -> String {
    format!("frame_{i:06}.png")
}

pub fn write_frame_dir(dir: &Path, seq: &FrameSequence) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, f) in seq.frames.iter().enumerate() {
        let path = dir.join(frame_name(i));
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        f.write_to(&mut w, image::ImageFormat::Png)
            .map_err(|e| Error::io(&path, std::io::Error::other(e)))?;
        w.flush().map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

pub fn read_frame_dir(dir: &Path, video_id: &str, fps: f64) -> Result<FrameSequence> {
    let mut frames = Vec::new();
    loop {
        let path = dir.join(frame_name(frames.len()));
        if !path.exists() {
            break;
        }
        let img = image::open(&path).map_err(|e| Error::io(&path, std::io::Error::other(e)))?;
        frames.push(img.into_luma8());
    }
    if frames.is_empty() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no frame_000000.png"),
        ));
    }
    FrameSequence::new(video_id, fps, frames)
}

/// Loads either storage layout, choosing by whether `path` is a directory.
pub fn load_frames(path: &Path, video_id: &str, fps: f64) -> Result<FrameSequence> {
    if path.is_dir() {
        read_frame_dir(path, video_id, fps)
    } else {
        read_raw(path, video_id, fps)
    }
}
