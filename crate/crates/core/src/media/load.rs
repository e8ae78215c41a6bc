use std::fs;
use std::path::{Path, PathBuf};

use super::{FrameSequence, RgbFrame};
use crate::error::{Error, Result};

const FRAME_EXTENSIONS: &[&str] = &["png", "ppm", "pnm"];

fn is_frame_file(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| FRAME_EXTENSIONS.iter().any(|x| x.eq_ignore_ascii_case(e)))
        .unwrap_or(false)
}

fn frame_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_file() && is_frame_file(&path) {
            paths.push(path);
        }
    }
    // Lexicographic file-name order is frame order.
    paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(paths)
}

fn decode(path: &Path) -> Result<RgbFrame> {
    let img = image::open(path).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let rgb = img.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let pixels = rgb.pixels().map(|p| p.0).collect();
    RgbFrame::new(w, h, pixels).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Loads every PNG/PPM file in `dir`, ordered by file name.
pub fn load_frames(dir: impl AsRef<Path>) -> Result<FrameSequence> {
    let dir = dir.as_ref();
    let paths = frame_paths(dir)?;
    if paths.is_empty() {
        return Err(Error::NoFrames(dir.to_path_buf()));
    }
    let mut frames = Vec::with_capacity(paths.len());
    for path in &paths {
        let frame = decode(path)?;
        if let Some(first) = frames.first() {
            let first: &RgbFrame = first;
            if (first.width(), first.height()) != (frame.width(), frame.height()) {
                return Err(Error::DimensionMismatch {
                    path: path.clone(),
                    want_w: first.width(),
                    want_h: first.height(),
                    got_w: frame.width(),
                    got_h: frame.height(),
                });
            }
        }
        frames.push(frame);
    }
    let id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    FrameSequence::new(id, frames)
}

/// Writes a frame as PNG; used by fixtures and the stub provider.
pub fn write_png(frame: &RgbFrame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let img = image::RgbImage::from_raw(
        frame.width() as u32,
        frame.height() as u32,
        frame.as_bytes(),
    )
    .expect("buffer length matches dimensions");
    img.save(path).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

pub(crate) fn encode_png(frame: &RgbFrame) -> Vec<u8> {
    use image::ImageEncoder;
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(
            &frame.as_bytes(),
            frame.width() as u32,
            frame.height() as u32,
            image::ExtendedColorType::Rgb8,
        )
        .expect("in-memory png encoding");
    out
}
