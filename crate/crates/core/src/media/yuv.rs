use super::RgbFrame;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YuvLayout {
    /// `YYY… UUU… VVV…`
    Planar,
    /// `YUV YUV …`
    Interleaved,
}

/// 8-bit 4:4:4 YUV frame in either byte layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Yuv444Frame {
    width: usize,
    height: usize,
    layout: YuvLayout,
    data: Vec<u8>,
}

impl Yuv444Frame {
    pub fn from_bytes(
        width: usize,
        height: usize,
        layout: YuvLayout,
        data: Vec<u8>,
    ) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != 3 * width * height {
            return Err(Error::InvalidFrame(format!(
                "{} bytes for a {width}x{height} yuv444 frame",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            layout,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn layout(&self) -> YuvLayout {
        self.layout
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    /// Plane 0 = Y, 1 = U, 2 = V, regardless of layout.
    pub fn plane(&self, c: usize) -> Vec<u8> {
        assert!(c < 3, "plane index {c}");
        let n = self.width * self.height;
        match self.layout {
            YuvLayout::Planar => self.data[c * n..(c + 1) * n].to_vec(),
            YuvLayout::Interleaved => self.data.iter().skip(c).step_by(3).copied().collect(),
        }
    }

    /// Sample `c` of pixel `i` (row-major index).
    pub fn sample(&self, i: usize, c: usize) -> u8 {
        match self.layout {
            YuvLayout::Planar => self.data[c * self.width * self.height + i],
            YuvLayout::Interleaved => self.data[3 * i + c],
        }
    }

    /// Inverse of [`planar_to_interleaved`].
    pub fn to_planar(&self) -> Yuv444Frame {
        match self.layout {
            YuvLayout::Planar => self.clone(),
            YuvLayout::Interleaved => {
                let data = (0..3).flat_map(|c| self.plane(c)).collect();
                Yuv444Frame {
                    data,
                    layout: YuvLayout::Planar,
                    ..*self
                }
            }
        }
    }
}

fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn pixel_to_yuv(p: [u8; 3]) -> [u8; 3] {
    let (r, g, b) = (f64::from(p[0]), f64::from(p[1]), f64::from(p[2]));
    let y = 0.299 * r + 0.587 * g + 0.114 * b;
    let u = 128.0 - 0.168_736 * r - 0.331_264 * g + 0.5 * b;
    let v = 128.0 + 0.5 * r - 0.418_688 * g - 0.081_312 * b;
    [to_u8(y), to_u8(u), to_u8(v)]
}

fn yuv_to_pixel(yuv: [u8; 3]) -> [u8; 3] {
    let y = f64::from(yuv[0]);
    let u = f64::from(yuv[1]) - 128.0;
    let v = f64::from(yuv[2]) - 128.0;
    [
        to_u8(y + 1.402 * v),
        to_u8(y - 0.344_136 * u - 0.714_136 * v),
        to_u8(y + 1.772 * u),
    ]
}

/// BT.601 full-range RGB to YUV 4:4:4.
pub fn rgb_to_yuv444(frame: &RgbFrame, layout: YuvLayout) -> Yuv444Frame {
    let n = frame.width() * frame.height();
    let mut data = vec![0u8; 3 * n];
    for (i, &p) in frame.pixels().iter().enumerate() {
        let yuv = pixel_to_yuv(p);
        for c in 0..3 {
            match layout {
                YuvLayout::Planar => data[c * n + i] = yuv[c],
                YuvLayout::Interleaved => data[3 * i + c] = yuv[c],
            }
        }
    }
    Yuv444Frame {
        width: frame.width(),
        height: frame.height(),
        layout,
        data,
    }
}

pub fn yuv444_to_rgb(frame: &Yuv444Frame) -> RgbFrame {
    let n = frame.width * frame.height;
    let pixels = (0..n)
        .map(|i| yuv_to_pixel([frame.sample(i, 0), frame.sample(i, 1), frame.sample(i, 2)]))
        .collect();
    RgbFrame::new(frame.width, frame.height, pixels).expect("dimensions come from a valid frame")
}

/// Reorders `YYY…UUU…VVV…` into `YUVYUV…`.
pub fn planar_to_interleaved(frame: &Yuv444Frame) -> Result<Yuv444Frame> {
    if frame.layout != YuvLayout::Planar {
        return Err(Error::WrongLayout { expected: "planar" });
    }
    let n = frame.width * frame.height;
    let mut data = Vec::with_capacity(3 * n);
    for i in 0..n {
        data.extend_from_slice(&[frame.data[i], frame.data[n + i], frame.data[2 * n + i]]);
    }
    Ok(Yuv444Frame {
        data,
        layout: YuvLayout::Interleaved,
        ..*frame
    })
}
