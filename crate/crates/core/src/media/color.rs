use super::{GrayFrame, RgbFrame};

/// CIELAB coordinates of one pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lab {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

pub(crate) fn luma(p: [u8; 3]) -> u8 {
    let y = LUMA_R * f64::from(p[0]) + LUMA_G * f64::from(p[1]) + LUMA_B * f64::from(p[2]);
    y.round().clamp(0.0, 255.0) as u8
}

/// BT.601 full-range luma.
pub fn to_grayscale(frame: &RgbFrame) -> GrayFrame {
    let pixels = frame.pixels().iter().map(|&p| luma(p)).collect();
    GrayFrame::new(frame.width(), frame.height(), pixels)
        .expect("dimensions come from a valid frame")
}

// sRGB primaries, D65 white.
const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];
const WHITE_D65: [f64; 3] = [0.950_47, 1.0, 1.088_83];

fn srgb_to_linear(c: u8) -> f64 {
    let c = f64::from(c) / 255.0;
    if c <= 0.040_45 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

pub(crate) fn pixel_to_lab(p: [u8; 3]) -> Lab {
    let lin = [
        srgb_to_linear(p[0]),
        srgb_to_linear(p[1]),
        srgb_to_linear(p[2]),
    ];
    let mut xyz = [0.0; 3];
    for (row, out) in SRGB_TO_XYZ.iter().zip(xyz.iter_mut()) {
        *out = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
    }
    let fx = lab_f(xyz[0] / WHITE_D65[0]);
    let fy = lab_f(xyz[1] / WHITE_D65[1]);
    let fz = lab_f(xyz[2] / WHITE_D65[2]);
    Lab {
        l: 116.0 * fy - 16.0,
        a: 500.0 * (fx - fy),
        b: 200.0 * (fy - fz),
    }
}

/// sRGB (D65) to CIELAB, one triple per pixel in row-major order.
pub fn rgb_to_lab(frame: &RgbFrame) -> Vec<Lab> {
    frame.pixels().iter().map(|&p| pixel_to_lab(p)).collect()
}
