//! Frame containers, colourspace conversions and dataset manifests.

mod color;
mod load;
mod manifest;
mod yuv;

pub use color::{rgb_to_lab, to_grayscale, Lab};
pub(crate) use load::encode_png;
pub use load::{load_frames, write_png};
pub use manifest::{DatasetManifest, ManifestEntry};
pub use yuv::{planar_to_interleaved, rgb_to_yuv444, yuv444_to_rgb, Yuv444Frame, YuvLayout};

use crate::error::{Error, Result};

/// Row-major 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbFrame {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl RgbFrame {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidFrame(format!("empty frame {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidFrame(format!(
                "{} pixels for a {width}x{height} frame",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        Self::new(width, height, vec![rgb; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    /// Raw interleaved RGB bytes.
    pub fn as_bytes(&self) -> Vec<u8> {
        self.pixels.iter().flatten().copied().collect()
    }

    /// One colour channel (0 = R, 1 = G, 2 = B) as floats.
    pub fn channel(&self, c: usize) -> Vec<f64> {
        self.pixels.iter().map(|p| f64::from(p[c])).collect()
    }
}

/// Row-major 8-bit single-channel image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayFrame {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayFrame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidFrame(format!("empty frame {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidFrame(format!(
                "{} pixels for a {width}x{height} frame",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.pixels.iter().map(|&p| f64::from(p)).collect()
    }
}

/// A decoded clip: ordered frames of identical size.
#[derive(Debug, Clone)]
pub struct FrameSequence {
    source_id: String,
    width: usize,
    height: usize,
    frames: Vec<RgbFrame>,
}

impl FrameSequence {
    pub fn new(source_id: impl Into<String>, frames: Vec<RgbFrame>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::InvalidFrame("frame sequence needs at least one frame".into()))?;
        let (width, height) = (first.width(), first.height());
        if let Some((i, f)) = frames
            .iter()
            .enumerate()
            .find(|(_, f)| f.width() != width || f.height() != height)
        {
            return Err(Error::InvalidFrame(format!(
                "frame {i} is {}x{}, expected {width}x{height}",
                f.width(),
                f.height()
            )));
        }
        Ok(Self {
            source_id: source_id.into(),
            width,
            height,
            frames,
        })
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[RgbFrame] {
        &self.frames
    }
}
