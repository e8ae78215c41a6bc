//! Float image buffer and the small set of filters the extractors share.

use crate::media::GrayFrame;

/// Single-channel `f64` image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), width * height, "plane buffer length");
        Self {
            width,
            height,
            data,
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![0.0; width * height])
    }

    pub fn from_gray(frame: &GrayFrame) -> Self {
        Self::new(frame.width(), frame.height(), frame.to_f64())
    }

    pub fn from_bytes(width: usize, height: usize, bytes: &[u8]) -> Self {
        Self::new(width, height, bytes.iter().map(|&b| f64::from(b)).collect())
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Pixel with replicated borders.
    #[inline]
    pub fn at_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    /// Pixel with zero padding.
    #[inline]
    pub fn at_or_zero(&self, x: isize, y: isize) -> f64 {
        if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
            0.0
        } else {
            self.data[y as usize * self.width + x as usize]
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane::new(
            self.width,
            self.height,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Plane {
        let mut data = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            data.extend_from_slice(&self.data[y * self.width + x0..y * self.width + x0 + w]);
        }
        Plane::new(w, h, data)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Border {
    Replicate,
    Zero,
}

/// Dense 2-D correlation with an odd square kernel.
pub fn convolve(src: &Plane, kernel: &[f64], ksize: usize, border: Border) -> Plane {
    assert_eq!(kernel.len(), ksize * ksize);
    let r = (ksize / 2) as isize;
    let mut out = Plane::zeros(src.width, src.height);
    for y in 0..src.height as isize {
        for x in 0..src.width as isize {
            let mut acc = 0.0;
            for ky in -r..=r {
                for kx in -r..=r {
                    let k = kernel[((ky + r) as usize) * ksize + (kx + r) as usize];
                    let v = match border {
                        Border::Replicate => src.at_clamped(x + kx, y + ky),
                        Border::Zero => src.at_or_zero(x + kx, y + ky),
                    };
                    acc += k * v;
                }
            }
            out.data[y as usize * src.width + x as usize] = acc;
        }
    }
    out
}

/// Separable correlation: `row` along x then `col` along y.
pub fn convolve_separable(src: &Plane, row: &[f64], col: &[f64], border: Border) -> Plane {
    let sample = |p: &Plane, x: isize, y: isize| match border {
        Border::Replicate => p.at_clamped(x, y),
        Border::Zero => p.at_or_zero(x, y),
    };
    let rr = (row.len() / 2) as isize;
    let mut tmp = Plane::zeros(src.width, src.height);
    for y in 0..src.height as isize {
        for x in 0..src.width as isize {
            let mut acc = 0.0;
            for (i, k) in row.iter().enumerate() {
                acc += k * sample(src, x + i as isize - rr, y);
            }
            tmp.data[y as usize * src.width + x as usize] = acc;
        }
    }
    let rc = (col.len() / 2) as isize;
    let mut out = Plane::zeros(src.width, src.height);
    for y in 0..src.height as isize {
        for x in 0..src.width as isize {
            let mut acc = 0.0;
            for (i, k) in col.iter().enumerate() {
                acc += k * sample(&tmp, x, y + i as isize - rc);
            }
            out.data[y as usize * src.width + x as usize] = acc;
        }
    }
    out
}

/// Normalized 1-D Gaussian of `size` taps (odd).
pub fn gaussian_kernel_1d(size: usize, sigma: f64) -> Vec<f64> {
    assert!(size % 2 == 1, "kernel size must be odd");
    let r = (size / 2) as f64;
    let mut k: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - r;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

pub fn gaussian_blur(src: &Plane, size: usize, sigma: f64, border: Border) -> Plane {
    let k = gaussian_kernel_1d(size, sigma);
    convolve_separable(src, &k, &k, border)
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Population standard deviation.
pub fn std_pop(v: &[f64]) -> f64 {
    variance_pop(v).sqrt()
}

pub fn variance_pop(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}
