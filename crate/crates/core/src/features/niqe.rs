//! NIQE: distance between a frame's NSS patch statistics and a pristine
//! multivariate Gaussian.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::nss::{patch_grid, NSS_FEATURE_DIM};
use super::plane::Plane;
use crate::error::{Error, Result};
use crate::matrix_io;

pub const NIQE_MODEL_VERSION: u32 = 1;
pub const DEFAULT_PATCH_SIZE: usize = 96;
const MIN_FIT_FRAMES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NiqeModel {
    pub version: u32,
    pub feature_dim: usize,
    pub patch_size: usize,
    #[serde(with = "matrix_io::vector")]
    pub mean: DVector<f64>,
    #[serde(with = "matrix_io::matrix")]
    pub covariance: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NiqeScore {
    pub score: f64,
    /// No patch carried signal; scored as the all-zero feature vector.
    pub degenerate: bool,
    /// The pooled covariance was singular and a pseudo-inverse was used.
    pub pinv_fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NiqeFitOptions {
    pub patch_size: usize,
    /// Keep patches whose sharpness exceeds this fraction of the sharpest patch.
    pub sharpness_fraction: f64,
}

impl Default for NiqeFitOptions {
    fn default() -> Self {
        Self {
            patch_size: DEFAULT_PATCH_SIZE,
            sharpness_fraction: 0.0,
        }
    }
}

impl NiqeModel {
    pub fn validate(&self) -> Result<()> {
        let d = self.feature_dim;
        if self.mean.len() != d || self.covariance.nrows() != d || self.covariance.ncols() != d {
            return Err(Error::ModelFormat(format!(
                "niqe dims disagree: feature_dim {d}, mean {}, covariance {}x{}",
                self.mean.len(),
                self.covariance.nrows(),
                self.covariance.ncols()
            )));
        }
        if self.patch_size < 2 {
            return Err(Error::ModelFormat(format!(
                "niqe patch_size {}",
                self.patch_size
            )));
        }
        let asym = (&self.covariance - self.covariance.transpose()).amax();
        if asym > 1e-9 * self.covariance.amax().max(1.0) {
            return Err(Error::ModelFormat(format!(
                "niqe covariance not symmetric ({asym:e})"
            )));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        if model.version != NIQE_MODEL_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported niqe model version {}",
                model.version
            )));
        }
        model.validate()?;
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

fn check_size(plane: &Plane, patch: usize) -> Result<()> {
    if plane.width < 2 * patch || plane.height < 2 * patch {
        return Err(Error::FrameTooSmall(format!(
            "niqe with {patch}px patches needs at least {}x{}, got {}x{}",
            2 * patch,
            2 * patch,
            plane.width,
            plane.height
        )));
    }
    Ok(())
}

fn sample_mvg(rows: &[[f64; NSS_FEATURE_DIM]]) -> (DVector<f64>, DMatrix<f64>) {
    let n = rows.len();
    let d = NSS_FEATURE_DIM;
    let mut mean = DVector::zeros(d);
    for r in rows {
        mean += DVector::from_row_slice(r);
    }
    mean /= n as f64;
    let mut cov = DMatrix::zeros(d, d);
    if n > 1 {
        for r in rows {
            let c = DVector::from_row_slice(r) - &mean;
            cov += &c * c.transpose();
        }
        cov /= (n - 1) as f64;
    }
    // Exact symmetry despite summation order.
    let cov = (&cov + cov.transpose()) * 0.5;
    (mean, cov)
}

/// Pristine-model fit over all patches of the supplied frames.
pub fn fit_niqe_model(frames: &[Plane], opts: &NiqeFitOptions) -> Result<NiqeModel> {
    if frames.len() < MIN_FIT_FRAMES {
        return Err(Error::InsufficientData(format!(
            "niqe fit needs at least {MIN_FIT_FRAMES} frames, got {}",
            frames.len()
        )));
    }
    let mut rows = Vec::new();
    for f in frames {
        check_size(f, opts.patch_size)?;
        let grid = patch_grid(f, opts.patch_size);
        let max_sharp = grid.sharpness.iter().copied().fold(0.0, f64::max);
        for (feat, sharp) in grid.features.iter().zip(&grid.sharpness) {
            if let Some(v) = feat {
                if *sharp >= opts.sharpness_fraction * max_sharp {
                    rows.push(*v);
                }
            }
        }
    }
    if rows.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "niqe fit found {} usable patches",
            rows.len()
        )));
    }
    let (mean, covariance) = sample_mvg(&rows);
    Ok(NiqeModel {
        version: NIQE_MODEL_VERSION,
        feature_dim: NSS_FEATURE_DIM,
        patch_size: opts.patch_size,
        mean,
        covariance,
    })
}

fn mahalanobis(diff: &DVector<f64>, pooled: &DMatrix<f64>) -> (f64, bool) {
    let scale = pooled.amax().max(f64::MIN_POSITIVE);
    if let Some(chol) = pooled.clone().cholesky() {
        let x = chol.solve(diff);
        let q = diff.dot(&x);
        // Near-singular matrices can still factor; fall back when the result is unusable.
        if q.is_finite() && q >= 0.0 && chol.l().diagonal().min() > 1e-12 * scale.sqrt() {
            return (q.sqrt(), false);
        }
    }
    let pinv = pooled
        .clone()
        .pseudo_inverse(1e-12 * scale)
        .expect("non-negative epsilon");
    let q = diff.dot(&(pinv * diff));
    (q.max(0.0).sqrt(), true)
}

/// NIQE score of one channel against `model`.
pub fn niqe_score(plane: &Plane, model: &NiqeModel) -> Result<NiqeScore> {
    check_size(plane, model.patch_size)?;
    let grid = patch_grid(plane, model.patch_size);
    let rows: Vec<[f64; NSS_FEATURE_DIM]> = grid.features.iter().flatten().copied().collect();
    let (mean, cov, degenerate) = if rows.is_empty() {
        let d = model.feature_dim;
        (DVector::zeros(d), DMatrix::zeros(d, d), true)
    } else {
        let (m, c) = sample_mvg(&rows);
        (m, c, false)
    };
    let pooled = (&model.covariance + cov) * 0.5;
    let diff = &model.mean - mean;
    let (score, pinv_fallback) = mahalanobis(&diff, &pooled);
    Ok(NiqeScore {
        score,
        degenerate,
        pinv_fallback,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(w: usize, h: usize, seed: u64) -> Plane {
        // Smooth structure plus mild deterministic texture.
        let data = (0..w * h)
            .map(|i| {
                let (x, y) = ((i % w) as f64, (i / w) as f64);
                let s = seed as f64;
                let v = 120.0
                    + 50.0 * ((x + s) / 9.0).sin() * ((y - s) / 13.0).cos()
                    + 25.0 * ((x * 0.7 + y * 1.3 + s) / 4.0).sin()
                    + 8.0
                        * (((i as u64).wrapping_mul(2_654_435_761).wrapping_add(seed) >> 7) % 17)
                            as f64
                        / 17.0;
                v.clamp(0.0, 255.0).round()
            })
            .collect();
        Plane::new(w, h, data)
    }

    #[test]
    fn fit_requires_ten_frames() {
        let frames: Vec<Plane> = (0..9).map(|s| textured(64, 64, s)).collect();
        let opts = NiqeFitOptions {
            patch_size: 16,
            ..Default::default()
        };
        assert!(matches!(
            fit_niqe_model(&frames, &opts),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn self_distance_is_small() {
        let frame = textured(96, 96, 3);
        let frames = vec![frame.clone(); 10];
        let opts = NiqeFitOptions {
            patch_size: 16,
            ..Default::default()
        };
        let model = fit_niqe_model(&frames, &opts).unwrap();
        assert_eq!(model.feature_dim, 36);
        assert!((&model.covariance - model.covariance.transpose()).amax() < 1e-9);
        let s = niqe_score(&frame, &model).unwrap();
        assert!(s.score < 0.5, "{s:?}");
        assert!(!s.degenerate);
    }

    #[test]
    fn too_small_frame_rejected() {
        let frames: Vec<Plane> = (0..10).map(|s| textured(64, 64, s)).collect();
        let model = fit_niqe_model(
            &frames,
            &NiqeFitOptions {
                patch_size: 16,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(matches!(
            niqe_score(&textured(31, 64, 0), &model),
            Err(Error::FrameTooSmall(_))
        ));
    }

    #[test]
    fn constant_channel_is_degenerate_not_nan() {
        let frames: Vec<Plane> = (0..10).map(|s| textured(64, 64, s)).collect();
        let model = fit_niqe_model(
            &frames,
            &NiqeFitOptions {
                patch_size: 16,
                ..Default::default()
            },
        )
        .unwrap();
        let flat = Plane::new(64, 64, vec![128.0; 64 * 64]);
        let s = niqe_score(&flat, &model).unwrap();
        assert!(s.degenerate);
        assert!(s.score.is_finite() && s.score > 0.0);
    }

    #[test]
    fn model_json_round_trip() {
        let frames: Vec<Plane> = (0..10).map(|s| textured(64, 64, s)).collect();
        let model = fit_niqe_model(
            &frames,
            &NiqeFitOptions {
                patch_size: 16,
                ..Default::default()
            },
        )
        .unwrap();
        let back = NiqeModel::from_json(&model.to_json()).unwrap();
        assert_eq!(back, model);
        let mut bad: serde_json::Value = serde_json::from_str(&model.to_json()).unwrap();
        bad["feature_dim"] = 35.into();
        assert!(NiqeModel::from_json(&bad.to_string()).is_err());
    }
}
