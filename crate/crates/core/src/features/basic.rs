//! Texture, sharpness, entropy and contrast of a grayscale frame.

use super::plane::{convolve, gaussian_blur, mean, std_pop, variance_pop, Border, Plane};
use crate::error::{Error, Result};
use crate::media::GrayFrame;

const SOBEL_X: [f64; 9] = [-1.0, 0.0, 1.0, -2.0, 0.0, 2.0, -1.0, 0.0, 1.0];
const SOBEL_Y: [f64; 9] = [-1.0, -2.0, -1.0, 0.0, 0.0, 0.0, 1.0, 2.0, 1.0];
const SHARPEN: [f64; 9] = [0.0, -1.0, 0.0, -1.0, 5.0, -1.0, 0.0, -1.0, 0.0];

/// Variance of the Sobel gradient magnitude after a 5x5 Gaussian blur (σ = 1).
pub fn texture_score(frame: &GrayFrame) -> Result<f64> {
    if frame.width().min(frame.height()) < 3 {
        return Err(Error::FrameTooSmall(format!(
            "texture needs at least 3x3, got {}x{}",
            frame.width(),
            frame.height()
        )));
    }
    let blurred = gaussian_blur(&Plane::from_gray(frame), 5, 1.0, Border::Replicate);
    let gx = convolve(&blurred, &SOBEL_X, 3, Border::Replicate);
    let gy = convolve(&blurred, &SOBEL_Y, 3, Border::Replicate);
    let magnitude: Vec<f64> = gx
        .data
        .iter()
        .zip(&gy.data)
        .map(|(a, b)| (a * a + b * b).sqrt())
        .collect();
    Ok(variance_pop(&magnitude))
}

/// RMS difference between the frame and its 3x3-sharpened, clamped copy.
pub fn sharpness_score(frame: &GrayFrame) -> f64 {
    let src = Plane::from_gray(frame);
    let sharp = convolve(&src, &SHARPEN, 3, Border::Replicate).map(|v| v.clamp(0.0, 255.0));
    let mse = src
        .data
        .iter()
        .zip(&sharp.data)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / src.data.len() as f64;
    mse.sqrt()
}

/// Shannon entropy (bits) of the 256-bin intensity histogram.
pub fn entropy_score(frame: &GrayFrame) -> f64 {
    let mut hist = [0usize; 256];
    for &p in frame.pixels() {
        hist[p as usize] += 1;
    }
    let n = frame.pixels().len() as f64;
    let h = -hist
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.log2()
        })
        .sum::<f64>();
    h.max(0.0)
}

/// Coefficient of variation of intensity; 0 for an all-black frame.
pub fn contrast_score(frame: &GrayFrame) -> f64 {
    let v = frame.to_f64();
    let m = mean(&v);
    if m == 0.0 {
        0.0
    } else {
        std_pop(&v) / m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(v: u8) -> GrayFrame {
        GrayFrame::filled(16, 12, v).unwrap()
    }

    fn checkerboard(n: usize) -> GrayFrame {
        GrayFrame::from_fn(n, n, |x, y| if (x + y) % 2 == 0 { 0 } else { 255 }).unwrap()
    }

    #[test]
    fn constant_frames_score_zero() {
        let f = constant(93);
        assert_eq!(texture_score(&f).unwrap(), 0.0);
        assert_eq!(sharpness_score(&f), 0.0);
        assert_eq!(entropy_score(&f), 0.0);
        assert_eq!(contrast_score(&f), 0.0);
    }

    #[test]
    fn black_frame_contrast_is_zero() {
        assert_eq!(contrast_score(&constant(0)), 0.0);
    }

    #[test]
    fn checkerboard_contrast_and_entropy() {
        let f = checkerboard(8);
        assert!((contrast_score(&f) - 1.0).abs() < 1e-12);
        assert!((entropy_score(&f) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_bounded_by_eight_bits() {
        let f = GrayFrame::from_fn(16, 16, |x, y| (y * 16 + x) as u8).unwrap();
        assert!((entropy_score(&f) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn texture_rejects_tiny_frames() {
        let f = GrayFrame::filled(2, 10, 0).unwrap();
        assert!(matches!(texture_score(&f), Err(Error::FrameTooSmall(_))));
    }

    #[test]
    fn checkerboard_sharper_than_blurred() {
        // Mid-level values: a 0/255 board saturates the clamp and scores 0.
        let f = GrayFrame::from_fn(16, 16, |x, y| if (x + y) % 2 == 0 { 96 } else { 160 }).unwrap();
        let blurred = gaussian_blur(&Plane::from_gray(&f), 5, 1.0, Border::Replicate);
        let blurred = GrayFrame::new(
            16,
            16,
            blurred.data.iter().map(|v| v.round() as u8).collect(),
        )
        .unwrap();
        assert!(sharpness_score(&f) > sharpness_score(&blurred));
    }
}
