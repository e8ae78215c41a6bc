//! Spectral spread score.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::plane::{mean, std_pop};
use crate::media::RgbFrame;

/// Which statistics the spectral score is computed from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralMode {
    /// Magnitudes of the 2-D DFT of each colour channel.
    #[default]
    Fourier,
    /// Raw channel intensities.
    Channel,
}

/// |DFT| of a row-major real image.
pub fn dft_magnitude(width: usize, height: usize, data: &[f64]) -> Vec<f64> {
    let mut planner = FftPlanner::<f64>::new();
    let row_fft = planner.plan_fft_forward(width);
    let col_fft = planner.plan_fft_forward(height);
    let mut buf: Vec<Complex<f64>> = data.iter().map(|&v| Complex::new(v, 0.0)).collect();
    for row in buf.chunks_exact_mut(width) {
        row_fft.process(row);
    }
    let mut col = vec![Complex::new(0.0, 0.0); height];
    for x in 0..width {
        for y in 0..height {
            col[y] = buf[y * width + x];
        }
        col_fft.process(&mut col);
        for y in 0..height {
            buf[y * width + x] = col[y];
        }
    }
    buf.iter().map(|c| c.norm()).collect()
}

/// Σ std / Σ mean over the three colour channels; 0 when every mean is 0.
pub fn spectral_score(frame: &RgbFrame, mode: SpectralMode) -> f64 {
    let (mut sum_std, mut sum_mean) = (0.0, 0.0);
    for c in 0..3 {
        let channel = frame.channel(c);
        let values = match mode {
            SpectralMode::Fourier => dft_magnitude(frame.width(), frame.height(), &channel),
            SpectralMode::Channel => channel,
        };
        sum_std += std_pop(&values);
        sum_mean += mean(&values);
    }
    if sum_mean == 0.0 {
        0.0
    } else {
        sum_std / sum_mean
    }
}
